#include "recwalk/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "recwalk/error.hpp"

namespace recwalk {

namespace {

// Below this many stored entries a parallel region costs more than it saves.
constexpr std::size_t kParallelNnz = 1 << 15;

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": vector length " +
                                                  std::to_string(got) + ", expected " +
                                                  std::to_string(want));
  }
}

}  // namespace

double SparseSlice::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> entries,
                           Duplicates duplicates)
    : n_rows_(n_rows), n_cols_(n_cols) {
  for (const auto& t : entries) {
    if (t.row >= n_rows || t.col >= n_cols) {
      throw Error(ErrorCode::InvalidMatrix, "entry (" + std::to_string(t.row) + ", " +
                                                std::to_string(t.col) + ") out of range");
    }
    if (!std::isfinite(t.value) || t.value < 0.0) {
      throw Error(ErrorCode::NegativeWeight, "entry (" + std::to_string(t.row) + ", " +
                                                 std::to_string(t.col) +
                                                 ") is negative or not finite");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<Triplet> kept;
  kept.reserve(entries.size());
  for (const auto& t : entries) {
    if (!kept.empty() && kept.back().row == t.row && kept.back().col == t.col) {
      if (duplicates == Duplicates::Reject) {
        throw Error(ErrorCode::InvalidMatrix, "duplicate entry (" + std::to_string(t.row) +
                                                  ", " + std::to_string(t.col) + ")");
      }
      continue;
    }
    kept.push_back(t);
  }
  if (duplicates == Duplicates::Binarize) {
    for (auto& t : kept) t.value = 1.0;
  }
  std::erase_if(kept, [](const Triplet& t) { return t.value == 0.0; });

  row_ptr_.assign(n_rows + 1, 0);
  col_ptr_.assign(n_cols + 1, 0);
  row_cols_.resize(kept.size());
  row_values_.resize(kept.size());
  col_rows_.resize(kept.size());
  col_values_.resize(kept.size());

  for (const auto& t : kept) {
    ++row_ptr_[t.row + 1];
    ++col_ptr_[t.col + 1];
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
  std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());

  // kept is row-major sorted, so both fills below produce sorted minor indices.
  for (std::size_t k = 0; k < kept.size(); ++k) {
    row_cols_[k] = kept[k].col;
    row_values_[k] = kept[k].value;
  }
  std::vector<std::size_t> next(col_ptr_.begin(), col_ptr_.end() - 1);
  for (const auto& t : kept) {
    const std::size_t slot = next[t.col]++;
    col_rows_[slot] = t.row;
    col_values_[slot] = t.value;
  }
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({Index(i), Index(i), 1.0});
  return SparseMatrix(n, n, std::move(t));
}

SparseSlice SparseMatrix::row(std::size_t i) const {
  const std::size_t b = row_ptr_[i], e = row_ptr_[i + 1];
  return {std::span(row_cols_).subspan(b, e - b), std::span(row_values_).subspan(b, e - b)};
}

SparseSlice SparseMatrix::col(std::size_t j) const {
  const std::size_t b = col_ptr_[j], e = col_ptr_[j + 1];
  return {std::span(col_rows_).subspan(b, e - b), std::span(col_values_).subspan(b, e - b)};
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  const auto it = std::lower_bound(r.indices.begin(), r.indices.end(), Index(j));
  if (it == r.indices.end() || *it != j) return 0.0;
  return r.values[std::size_t(it - r.indices.begin())];
}

DenseVector SparseMatrix::row_sums() const {
  DenseVector s(n_rows_, 0.0);
  for (std::size_t i = 0; i < n_rows_; ++i) s[i] = row(i).sum();
  return s;
}

double SparseMatrix::max_row_sum() const {
  const auto s = row_sums();
  return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (const auto& e : triplets()) t.push_back({e.col, e.row, e.value});
  return SparseMatrix(n_cols_, n_rows_, std::move(t));
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      t.push_back({Index(i), row_cols_[k], row_values_[k]});
    }
  }
  return t;
}

bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
  return a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ && a.row_ptr_ == b.row_ptr_ &&
         a.row_cols_ == b.row_cols_ && a.row_values_ == b.row_values_;
}

StochasticMatrix::StochasticMatrix(SparseMatrix m, double tolerance) : tolerance_(tolerance) {
  const auto sums = m.row_sums();
  // Rows already normalized up to summation rounding are left untouched, so
  // wrapping the same matrix twice (e.g. after a reload) changes nothing.
  std::vector<char> rescale(sums.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    const double residual = std::abs(sums[i] - 1.0);
    if (!(residual <= tolerance)) {
      throw Error(ErrorCode::NotStochastic,
                  "row " + std::to_string(i) + " sums to " + std::to_string(sums[i]));
    }
    const double rounding = 4.0 * double(m.row(i).size() + 1) * 2.220446049250313e-16;
    rescale[i] = residual > rounding;
    any = any || rescale[i];
  }
  if (!any) {
    m_ = std::move(m);
    return;
  }
  auto t = m.triplets();
  for (auto& e : t) {
    if (rescale[e.row]) e.value /= sums[e.row];
  }
  m_ = SparseMatrix(m.rows(), m.cols(), std::move(t));
}

StochasticMatrix row_normalize(const SparseMatrix& a) {
  const auto sums = a.row_sums();
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (sums[i] <= 0.0) throw Error(ErrorCode::ZeroRow, "row " + std::to_string(i) + " is empty");
  }
  auto t = a.triplets();
  for (auto& e : t) e.value /= sums[e.row];
  return StochasticMatrix(SparseMatrix(a.rows(), a.cols(), std::move(t)));
}

DenseVector vec_mat(std::span<const double> x, const SparseMatrix& a) {
  check_length(x.size(), a.rows(), "vec_mat");
  const auto ptr = a.col_offsets();
  const auto rows = a.col_indices();
  const auto vals = a.col_values();
  const auto n = static_cast<std::ptrdiff_t>(a.cols());
  DenseVector y(a.cols(), 0.0);
#pragma omp parallel for schedule(static) if (a.nnz() >= kParallelNnz)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = ptr[j]; k < ptr[j + 1]; ++k) s += x[rows[k]] * vals[k];
    y[std::size_t(j)] = s;
  }
  return y;
}

DenseVector vec_mat(std::span<const double> x, const StochasticMatrix& a) {
  return vec_mat(x, a.matrix());
}

DenseVector mat_vec(const SparseMatrix& a, std::span<const double> x) {
  check_length(x.size(), a.cols(), "mat_vec");
  DenseVector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r.values[k] * x[r.indices[k]];
    y[i] = s;
  }
  return y;
}

double sparse_dot(const SparseSlice& a, const SparseSlice& b) {
  double s = 0.0;
  std::size_t p = 0, q = 0;
  while (p < a.size() && q < b.size()) {
    if (a.indices[p] < b.indices[q]) {
      ++p;
    } else if (b.indices[q] < a.indices[p]) {
      ++q;
    } else {
      s += a.values[p++] * b.values[q++];
    }
  }
  return s;
}

double cosine_columns(const SparseMatrix& r, std::size_t i, std::size_t j) {
  const auto ci = r.col(i);
  const auto cj = r.col(j);
  if (ci.size() == 0) throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(i));
  if (cj.size() == 0) throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j));
  const double dot = sparse_dot(ci, cj);
  const double sq_i = sparse_dot(ci, ci);
  const double sq_j = sparse_dot(cj, cj);
  return dot / (std::sqrt(sq_i) * std::sqrt(sq_j));
}

DenseVector unit_vector(std::size_t n, std::size_t i) {
  DenseVector e(n, 0.0);
  e.at(i) = 1.0;
  return e;
}

double norm1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double norm1_diff(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return s;
}

double norm_inf_diff(std::span<const double> x, std::span<const double> y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

namespace reference {

DenseVector vec_mat(std::span<const double> x, const SparseMatrix& a) {
  check_length(x.size(), a.rows(), "vec_mat");
  DenseVector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (x[i] == 0.0) continue;
    const auto r = a.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) y[r.indices[k]] += x[i] * r.values[k];
  }
  return y;
}

}  // namespace reference

}  // namespace recwalk
