#include "recwalk/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <omp.h>

#include "recwalk/error.hpp"

namespace recwalk {

UserMetrics per_user_metrics(std::size_t rank, std::size_t n) {
  if (rank == 0) throw Error(ErrorCode::InvalidParameter, "ranks are 1-based");
  if (rank > n) return {};
  return {1.0, 1.0 / double(rank), 1.0 / std::log2(double(rank) + 1.0)};
}

EvalReport EvalReport::from_ranks(std::vector<std::optional<std::size_t>> ranks,
                                  std::size_t cutoff, std::uint64_t seed) {
  EvalReport report;
  report.cutoff = cutoff;
  report.seed = seed;
  for (const auto& r : ranks) {
    if (!r) continue;
    const auto m = per_user_metrics(*r, cutoff);
    report.hr += m.hr;
    report.arhr += m.arhr;
    report.ndcg += m.ndcg;
    ++report.num_evaluated;
  }
  if (report.num_evaluated > 0) {
    report.hr /= double(report.num_evaluated);
    report.arhr /= double(report.num_evaluated);
    report.ndcg /= double(report.num_evaluated);
  }
  report.ranks = std::move(ranks);
  return report;
}

std::size_t heldout_rank(const RecommendationVector& scores, Index heldout,
                         std::span<const Index> negatives) {
  std::vector<Index> candidates;
  candidates.reserve(negatives.size() + 1);
  candidates.push_back(heldout);
  candidates.insert(candidates.end(), negatives.begin(), negatives.end());
  for (const auto& r : rank_candidates(scores, candidates)) {
    if (r.item == heldout) return r.rank;
  }
  return candidates.size();
}

namespace {

void check_compatible(const Scorer& scorer, const EvalSplit& split) {
  if (scorer.num_users() != split.num_users() || scorer.num_items() != split.train.cols()) {
    throw Error(ErrorCode::IndexMapMismatch, "split and model disagree on users or items");
  }
}

}  // namespace

EvalReport evaluate(const Scorer& scorer, const EvalSplit& split, std::size_t cutoff,
                    int threads) {
  check_compatible(scorer, split);
  const auto n = static_cast<std::ptrdiff_t>(split.num_users());
  std::vector<std::optional<std::size_t>> ranks(split.num_users());
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt)
  for (std::ptrdiff_t u = 0; u < n; ++u) {
    const auto& held = split.heldout[std::size_t(u)];
    if (!held || failed.load()) continue;
    try {
      const auto scores = scorer.score(std::size_t(u));
      ranks[std::size_t(u)] = heldout_rank(scores, *held, split.negatives[std::size_t(u)]);
    } catch (...) {
#pragma omp critical(recwalk_eval_failure)
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return EvalReport::from_ranks(std::move(ranks), cutoff, split.seed);
}

namespace reference {

EvalReport evaluate(const Scorer& scorer, const EvalSplit& split, std::size_t cutoff) {
  check_compatible(scorer, split);
  std::vector<std::optional<std::size_t>> ranks(split.num_users());
  for (std::size_t u = 0; u < split.num_users(); ++u) {
    if (!split.heldout[u]) continue;
    ranks[u] = heldout_rank(scorer.score(u), *split.heldout[u], split.negatives[u]);
  }
  return EvalReport::from_ranks(std::move(ranks), cutoff, split.seed);
}

}  // namespace reference

void write_report_table(std::ostream& out, const EvalReport& report, const std::string& label) {
  const auto flags = out.flags();
  out << "strategy   " << label << '\n'
      << "users      " << report.num_evaluated << '\n'
      << "seed       " << report.seed << '\n'
      << std::fixed << std::setprecision(2) << "HR@" << report.cutoff << "      "
      << 100.0 * report.hr << "%\n"
      << "ARHR@" << report.cutoff << "    " << 100.0 * report.arhr << "%\n"
      << "NDCG@" << report.cutoff << "    " << 100.0 * report.ndcg << "%\n";
  out.flags(flags);
}

void write_report_csv(std::ostream& out, const EvalReport& report, const std::string& label) {
  const auto flags = out.flags();
  out << "strategy,n,users,seed,hr,arhr,ndcg\n"
      << label << ',' << report.cutoff << ',' << report.num_evaluated << ',' << report.seed << ','
      << std::setprecision(17) << report.hr << ',' << report.arhr << ',' << report.ndcg << '\n';
  out.flags(flags);
}

CoverageReport coverage_audit(const Scorer& scorer, const SparseMatrix& train,
                              std::vector<double> thresholds, int threads) {
  if (scorer.num_users() != train.rows() || scorer.num_items() != train.cols()) {
    throw Error(ErrorCode::IndexMapMismatch, "training matrix and model disagree");
  }
  const std::size_t n_users = train.rows();
  const std::size_t n_items = train.cols();
  std::vector<double> share(n_users, 0.0);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt)
  for (std::ptrdiff_t su = 0; su < static_cast<std::ptrdiff_t>(n_users); ++su) {
    if (failed.load()) continue;
    const auto u = std::size_t(su);
    try {
      const auto scores = scorer.score(u);
      const auto consumed = train.row(u).indices;
      std::size_t positive = 0;
      std::size_t k = 0;
      for (std::size_t i = 0; i < n_items; ++i) {
        if (k < consumed.size() && consumed[k] == i) {
          ++k;
          continue;
        }
        if (scores.item_score(i) > 0.0) ++positive;
      }
      const std::size_t unseen = n_items - consumed.size();
      share[u] = unseen == 0 ? 1.0 : double(positive) / double(unseen);
    } catch (...) {
#pragma omp critical(recwalk_coverage_failure)
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  CoverageReport report;
  report.num_users = n_users;
  report.thresholds = std::move(thresholds);
  for (double t : report.thresholds) {
    const auto hits = std::count_if(share.begin(), share.end(), [&](double s) { return s >= t; });
    report.fractions.push_back(n_users ? double(hits) / double(n_users) : 0.0);
  }
  return report;
}

const char* to_string(Metric m) {
  switch (m) {
    case Metric::Hr: return "hr";
    case Metric::Arhr: return "arhr";
    case Metric::Ndcg: return "ndcg";
  }
  return "unknown";
}

Metric parse_metric(const std::string& name) {
  for (auto m : {Metric::Hr, Metric::Arhr, Metric::Ndcg}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::InvalidParameter, "unknown metric '" + name + "'");
}

double metric_value(const EvalReport& report, Metric m) {
  switch (m) {
    case Metric::Hr: return report.hr;
    case Metric::Arhr: return report.arhr;
    case Metric::Ndcg: return report.ndcg;
  }
  return 0.0;
}

GridResult grid_search(std::size_t num_points, const std::function<std::string(std::size_t)>& label,
                       const std::function<EvalReport(std::size_t)>& evaluate_point,
                       Metric objective, std::size_t max_concurrent) {
  if (num_points == 0) throw Error(ErrorCode::InvalidParameter, "empty grid");
  GridResult result;
  result.entries.resize(num_points);
  const int nt = int(std::max<std::size_t>(max_concurrent, 1));
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(num_points); ++k) {
    auto& entry = result.entries[std::size_t(k)];
    entry.label = label(std::size_t(k));
    try {
      entry.report = evaluate_point(std::size_t(k));
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
  }
  for (std::size_t k = 0; k < num_points; ++k) {
    const auto& r = result.entries[k].report;
    if (!r) continue;
    if (!result.best ||
        metric_value(*r, objective) > metric_value(*result.entries[*result.best].report, objective)) {
      result.best = k;
    }
  }
  return result;
}

void write_grid_csv(std::ostream& out, const GridResult& result) {
  const auto flags = out.flags();
  out << "point,config,hr,arhr,ndcg,best,error\n" << std::setprecision(17);
  for (std::size_t k = 0; k < result.entries.size(); ++k) {
    const auto& e = result.entries[k];
    out << k << ',' << e.label << ',';
    if (e.report) {
      out << e.report->hr << ',' << e.report->arhr << ',' << e.report->ndcg;
    } else {
      out << ",,";
    }
    out << ',' << (result.best && *result.best == k ? 1 : 0) << ',';
    std::string err = e.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << err << '\n';
  }
  out.flags(flags);
}

}  // namespace recwalk
