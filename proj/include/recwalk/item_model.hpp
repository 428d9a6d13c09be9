#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "recwalk/sparse.hpp"

namespace recwalk {

/// Neighborhood size, either absolute or as a percentage of the item count.
struct NeighborCount {
  double value = 0.0;
  bool percent = false;

  static NeighborCount absolute(std::size_t c) { return {double(c), false}; }
  static NeighborCount of_items(double pct) { return {pct, true}; }

  /// Parses "50" or "2.5%".
  static NeighborCount parse(const std::string& text);

  /// ceil(percent/100 * num_items) for percentages; the result is clamped to
  /// [1, num_items - 1].
  std::size_t resolve(std::size_t num_items) const;

  std::string to_string() const;
};

struct NeighborSet {
  Index item = 0;
  std::vector<Index> neighbors;
  std::vector<double> similarities;  // non-increasing
};

/// The `c` items j != i with largest cosine similarity to column i, ties
/// broken by ascending index. Throws ZeroColumn for an empty column.
NeighborSet top_c_neighbors(const SparseMatrix& r, std::size_t i, std::size_t c);

struct SolverOptions {
  double l1 = 1.0;  // penalty on the 1-norm
  double l2 = 1.0;  // penalty on half the squared 2-norm
  double tol = 1e-6;
  std::size_t max_iters = 1000;
  bool track_objective = false;
};

struct FitResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double objective = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // after each sweep, if tracked
};

/// Nonnegative elastic net in Gram form:
///   min_x 1/2 target_sq - rhs.x + 1/2 x'Gx + l1*sum(x) + l2/2 |x|^2,  x >= 0
/// with G = N'N, rhs = N'r and target_sq = r'r. Cyclic coordinate descent
/// from x = 0 until the largest coordinate change in a sweep drops below
/// `tol`. `gram` is row-major, size n*n.
FitResult solve_nonneg_elastic_net(std::span<const double> gram, std::span<const double> rhs,
                                   double target_sq, const SolverOptions& opts);

/// Solves the same problem for a dense target vector and the sparse matrix of
/// selected columns.
FitResult fit_column(std::span<const double> target, const SparseMatrix& columns,
                     const SolverOptions& opts);

/// Objective value of the problem above for a given x.
double elastic_net_objective(std::span<const double> gram, std::span<const double> rhs,
                             double target_sq, std::span<const double> x, double l1, double l2);

struct ItemModelParams {
  NeighborCount neighbors = NeighborCount::absolute(50);
  double l1 = 1.0;
  double l2 = 1.0;
  double tol = 1e-6;
  std::size_t max_iters = 1000;
  int threads = 0;  // 0: OpenMP default
  // Largest item count for which the full item co-occurrence matrix is
  // precomputed; above it Gram blocks are formed per column.
  std::size_t dense_gram_limit = 8192;
};

struct ColumnStats {
  std::size_t iterations = 0;
  double objective = 0.0;
  bool converged = true;
};

struct ItemModel {
  SparseMatrix w;  // items x items; column i holds the weights fitted for item i
  std::size_t neighbors = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  std::vector<ColumnStats> stats;

  std::size_t num_items() const { return w.rows(); }
  std::size_t unconverged() const;
};

/// Fits every column in parallel. Deterministic for any thread count.
ItemModel build_item_model(const SparseMatrix& r, const ItemModelParams& params);

namespace reference {

/// Serial per-column fit using sparse column products only.
ItemModel build_item_model(const SparseMatrix& r, const ItemModelParams& params);

}  // namespace reference

}  // namespace recwalk
