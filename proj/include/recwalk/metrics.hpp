#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "recwalk/dataset.hpp"
#include "recwalk/recommender.hpp"

namespace recwalk {

struct UserMetrics {
  double hr = 0.0;
  double arhr = 0.0;
  double ndcg = 0.0;
};

/// Single held-out item metrics for a 1-based rank at cutoff n.
UserMetrics per_user_metrics(std::size_t rank, std::size_t n);

struct EvalReport {
  std::size_t cutoff = 10;
  double hr = 0.0;
  double arhr = 0.0;
  double ndcg = 0.0;
  std::vector<std::optional<std::size_t>> ranks;  // per user; empty without a held-out item
  std::size_t num_evaluated = 0;
  std::uint64_t seed = 0;

  /// Means of per_user_metrics over the recorded ranks, summed in user order.
  static EvalReport from_ranks(std::vector<std::optional<std::size_t>> ranks, std::size_t cutoff,
                               std::uint64_t seed);
};

/// Rank of the held-out item among itself and the user's negatives.
std::size_t heldout_rank(const RecommendationVector& scores, Index heldout,
                         std::span<const Index> negatives);

/// Scores every user with a held-out item, in parallel over users.
EvalReport evaluate(const Scorer& scorer, const EvalSplit& split, std::size_t cutoff,
                    int threads = 0);

namespace reference {

/// Serial evaluation loop.
EvalReport evaluate(const Scorer& scorer, const EvalSplit& split, std::size_t cutoff);

}  // namespace reference

void write_report_table(std::ostream& out, const EvalReport& report, const std::string& label);
void write_report_csv(std::ostream& out, const EvalReport& report, const std::string& label);

struct CoverageReport {
  std::vector<double> thresholds;
  std::vector<double> fractions;  // of users meeting each threshold
  std::size_t num_users = 0;
};

/// For every user, the share of the items the user has not consumed that
/// receive a strictly positive score, compared against each threshold.
CoverageReport coverage_audit(const Scorer& scorer, const SparseMatrix& train,
                              std::vector<double> thresholds = {0.5, 0.9}, int threads = 0);

enum class Metric { Hr, Arhr, Ndcg };

const char* to_string(Metric m);
Metric parse_metric(const std::string& name);
double metric_value(const EvalReport& report, Metric m);

struct GridEntry {
  std::string label;
  std::optional<EvalReport> report;
  std::string error;  // set when the point failed
};

struct GridResult {
  std::optional<std::size_t> best;  // index into entries
  std::vector<GridEntry> entries;
};

/// Evaluates every lattice point and keeps the one maximizing the objective;
/// ties go to the earlier point. A point that throws is logged and skipped.
/// Up to `max_concurrent` points are evaluated at once.
GridResult grid_search(std::size_t num_points,
                       const std::function<std::string(std::size_t)>& label,
                       const std::function<EvalReport(std::size_t)>& evaluate_point,
                       Metric objective, std::size_t max_concurrent = 1);

void write_grid_csv(std::ostream& out, const GridResult& result);

}  // namespace recwalk
