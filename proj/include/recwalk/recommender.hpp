#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "recwalk/sparse.hpp"
#include "recwalk/walk_model.hpp"

namespace recwalk {

enum class Strategy {
  KStep,      // K-step landing probabilities on P
  PageRank,   // restarts to the user node on P
  Srw,        // K-step walk on row-normalized W from the user's history
  PrBaseline, // restarts to the user's history on row-normalized W
  Base,       // r_u' W
  KStepMi,    // K-step walk on M_I from the user's history
  PrMi,       // restarts to the user's history on M_I
};

const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

/// Scores for one user. Walk strategies on P score all U+I nodes, with item
/// j at position item_offset + j; item-graph strategies score items only.
struct RecommendationVector {
  std::size_t user = 0;
  DenseVector scores;
  std::size_t item_offset = 0;
  Strategy strategy = Strategy::KStep;
  std::size_t steps = 0;
  double damping = 0.0;

  double item_score(std::size_t item) const { return scores[item_offset + item]; }
  std::size_t num_items() const { return scores.size() - item_offset; }
};

/// e_u' P^K by K successive vector-matrix products.
RecommendationVector kstep(const RecWalkModel& model, std::size_t user, std::size_t steps);

inline constexpr double kDefaultPageRankTol = 1e-8;

/// Iteration cap for a restart walk: twice the number of steps after which
/// damping^k drops below tol, plus a small constant.
std::size_t pagerank_iteration_cap(double damping, double tol);

/// Fixed point of x' = eta x'P + (1-eta) e_u', iterating from e_u with
/// 1-norm renormalization until successive iterates differ by less than tol
/// in 1-norm and the set of nodes with positive mass has stopped growing.
/// Throws NotConverged after the iteration cap plus the matrix order.
RecommendationVector pagerank(const RecWalkModel& model, std::size_t user, double damping,
                              double tol = kDefaultPageRankTol);

/// Generic restart walk with an arbitrary teleport distribution.
DenseVector restart_walk(const StochasticMatrix& s, std::span<const double> teleport,
                         double damping, double tol);

/// start' S^K.
DenseVector landing_distribution(const StochasticMatrix& s, std::span<const double> start,
                                 std::size_t steps);

/// r_u / |r_u|_1 as a dense item vector. Throws ZeroHistory for an empty row.
DenseVector history_distribution(const SparseMatrix& r, std::size_t user);

/// phi_u' S^K on an item-graph transition matrix.
RecommendationVector srw_baseline(const StochasticMatrix& s, std::span<const double> phi,
                                  std::size_t steps);

/// Restart walk on S with teleport phi_u and damping p.
RecommendationVector pr_baseline(const StochasticMatrix& s, std::span<const double> phi,
                                 double damping, double tol = kDefaultPageRankTol);

/// r_u' W.
RecommendationVector base_model_scores(const SparseMatrix& w, std::span<const double> history);

/// Row-normalized item graph for the walk baselines. Rows of W without any
/// weight become self-loops so the walk stays defined.
StochasticMatrix item_graph_transition(const SparseMatrix& w);

struct RankedItem {
  Index item;
  std::size_t rank;  // 1-based
};

/// Candidates ordered by descending score, ties by ascending item index.
std::vector<RankedItem> rank_candidates(const RecommendationVector& scores,
                                        std::span<const Index> candidates);

/// Top-n unseen items for a user.
std::vector<std::pair<Index, double>> top_n(const RecommendationVector& scores, std::size_t n,
                                            std::span<const Index> exclude);

/// A configured recommendation strategy bound to its trained models.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual RecommendationVector score(std::size_t user) const = 0;
  virtual std::size_t num_users() const = 0;
  virtual std::size_t num_items() const = 0;
};

struct ScorerParams {
  Strategy strategy = Strategy::KStep;
  std::size_t steps = 5;   // K for the K-step strategies
  double damping = 0.5;    // eta or p for the restart strategies
  double tol = kDefaultPageRankTol;
};

/// Binds a strategy to a walk model and the training interactions. The
/// referenced objects must outlive the scorer.
std::unique_ptr<Scorer> make_scorer(const ScorerParams& params, const RecWalkModel& model,
                                    const SparseMatrix& train, const SparseMatrix& w);

}  // namespace recwalk
