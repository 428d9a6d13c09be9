#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <cstddef>
#include <string>
#include <vector>

#include "recwalk/sparse.hpp"
#include "recwalk/walk_model.hpp"

namespace recwalk {

/// Disjoint blocks covering the states 0..n-1.
class Partition {
 public:
  /// Throws InvalidPartition unless the blocks are nonempty, disjoint and
  /// cover 0..order-1.
  Partition(std::size_t order, std::vector<std::vector<std::size_t>> blocks);

  /// Every user in its own block and all items together.
  static Partition canonical(std::size_t num_users, std::size_t num_items);

  std::size_t order() const { return block_of_.size(); }
  std::size_t num_blocks() const { return num_blocks_; }
  std::size_t block_of(std::size_t state) const { return block_of_[state]; }

 private:
  std::vector<std::size_t> block_of_;
  std::size_t num_blocks_ = 0;
};

struct CouplingReport {
  double epsilon = 0.0;      // largest leak
  std::vector<double> leaks; // per row: mass leaving the row's block in one step
};

CouplingReport coupling_degree(const StochasticMatrix& p, const Partition& partition);

/// |P v - lambda v|_inf.
double eigenpair_residual(const SparseMatrix& p, std::span<const double> v, double lambda);

/// Residual of the eigenpair (1 - 2 alpha, v) with v = (1_U, -1_I).
double structural_eigenpair_residual(const RecWalkModel& model);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;  // by modulus, then real part, descending
  std::string method;
  std::size_t order = 0;

  /// Eigenvalues within `radius` of 1.
  std::size_t count_near_one(double radius) const;
};

inline constexpr std::size_t kDefaultMaxDenseOrder = 5000;

/// All eigenvalues of the densified matrix. Throws TooLarge above max_order.
SpectrumReport dense_spectrum(const SparseMatrix& p, std::size_t max_order = kDefaultMaxDenseOrder);
SpectrumReport dense_spectrum(const StochasticMatrix& p,
                              std::size_t max_order = kDefaultMaxDenseOrder);

/// Left stationary vector by power iteration, to `tol` in 1-norm.
DenseVector stationary_distribution(const StochasticMatrix& p, double tol = 1e-12,
                                    std::size_t max_iters = 1000000);

struct SubdominantOptions {
  double tol = 1e-8;
  std::size_t max_iters = 200000;  // budget of matrix-vector products
  std::size_t krylov_dim = 40;
  std::uint64_t seed = 1;
};

/// Modulus of the subdominant eigenvalue of an irreducible stochastic
/// matrix. Restarted Arnoldi on row vectors summing to zero, which is the
/// invariant subspace left after removing the unit eigenvalue; each restart
/// keeps the leading Ritz vector. Stops when the leading Ritz modulus changes
/// by less than tol relative between two restarts.
double subdominant_modulus(const StochasticMatrix& p, const SubdominantOptions& opts = {});

struct DriftPoint {
  std::size_t step = 0;
  double pairwise = 0.0;       // mean 1-norm distance over user pairs
  double to_stationary = 0.0;  // mean 1-norm distance to the stationary vector
};

/// How far apart users' k-step distributions stay, for k = 0..max_steps.
std::vector<DriftPoint> landing_drift(const RecWalkModel& model, std::span<const std::size_t> users,
                                      std::size_t max_steps);

}  // namespace recwalk
