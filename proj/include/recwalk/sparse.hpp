#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace recwalk {

using Index = std::uint32_t;
using DenseVector = std::vector<double>;

struct Triplet {
  Index row;
  Index col;
  double value;
};

enum class Duplicates {
  Reject,   // duplicate (row, col) pairs are an error
  Binarize, // duplicates collapse into a single entry of weight 1
};

/// Read-only view of one row (or column) of a SparseMatrix: parallel arrays
/// of minor indices (ascending) and weights.
struct SparseSlice {
  std::span<const Index> indices;
  std::span<const double> values;

  std::size_t size() const { return indices.size(); }
  double sum() const;
};

/// Immutable nonnegative sparse matrix with both CSR and CSC access paths.
///
/// Stored weights are finite and strictly positive; explicit zeros passed to
/// the constructor are dropped. Both views hold their minor indices sorted.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> entries,
               Duplicates duplicates = Duplicates::Reject);

  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return n_rows_; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nnz() const { return row_values_.size(); }

  SparseSlice row(std::size_t i) const;
  SparseSlice col(std::size_t j) const;

  /// Entry lookup by binary search in row i; 0 for structural zeros.
  double at(std::size_t i, std::size_t j) const;

  DenseVector row_sums() const;
  double max_row_sum() const;

  SparseMatrix transpose() const;

  /// Entries in row-major order.
  std::vector<Triplet> triplets() const;

  std::span<const std::size_t> row_offsets() const { return row_ptr_; }
  std::span<const Index> row_indices() const { return row_cols_; }
  std::span<const double> row_values() const { return row_values_; }
  std::span<const std::size_t> col_offsets() const { return col_ptr_; }
  std::span<const Index> col_indices() const { return col_rows_; }
  std::span<const double> col_values() const { return col_values_; }

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b);

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> row_cols_;
  std::vector<double> row_values_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<Index> col_rows_;
  std::vector<double> col_values_;
};

/// Row-stochastic wrapper. Construction checks every row sums to 1 within
/// `tolerance` and rescales each row by its sum once, so the stored rows sum
/// to 1 up to rounding.
class StochasticMatrix {
 public:
  static constexpr double kDefaultTolerance = 1e-10;

  StochasticMatrix() = default;
  explicit StochasticMatrix(SparseMatrix m, double tolerance = kDefaultTolerance);

  const SparseMatrix& matrix() const { return m_; }
  std::size_t order() const { return m_.rows(); }
  double tolerance() const { return tolerance_; }

 private:
  SparseMatrix m_;
  double tolerance_ = kDefaultTolerance;
};

/// Divides every row by its sum. Throws ZeroRow for an empty row.
StochasticMatrix row_normalize(const SparseMatrix& a);

/// x^T A, gathered column by column. Parallel over columns for large
/// matrices; the result does not depend on the thread count.
DenseVector vec_mat(std::span<const double> x, const SparseMatrix& a);
DenseVector vec_mat(std::span<const double> x, const StochasticMatrix& a);

/// A x.
DenseVector mat_vec(const SparseMatrix& a, std::span<const double> x);

/// Cosine of the angle between columns i and j.
double cosine_columns(const SparseMatrix& r, std::size_t i, std::size_t j);

/// Dot product of two sorted sparse slices.
double sparse_dot(const SparseSlice& a, const SparseSlice& b);

DenseVector unit_vector(std::size_t n, std::size_t i);

double norm1(std::span<const double> x);
double norm1_diff(std::span<const double> x, std::span<const double> y);
double norm_inf_diff(std::span<const double> x, std::span<const double> y);

namespace reference {

/// Serial row-scatter form of x^T A, kept as the baseline for the parallel
/// kernel.
DenseVector vec_mat(std::span<const double> x, const SparseMatrix& a);

}  // namespace reference

}  // namespace recwalk
