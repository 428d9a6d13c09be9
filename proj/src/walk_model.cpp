#include "recwalk/walk_model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "recwalk/error.hpp"

namespace recwalk {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

void require_nonzero_lines(const SparseMatrix& r) {
  for (std::size_t u = 0; u < r.rows(); ++u) {
    if (r.row(u).size() == 0) throw Error(ErrorCode::ZeroRow, "user " + std::to_string(u));
  }
  for (std::size_t i = 0; i < r.cols(); ++i) {
    if (r.col(i).size() == 0) throw Error(ErrorCode::ZeroColumn, "item " + std::to_string(i));
  }
}

}  // namespace

std::size_t ComponentLabeling::largest_component() const {
  return std::size_t(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
}

ComponentLabeling check_connectivity(const SparseMatrix& r) {
  const std::size_t n_users = r.rows();
  DisjointSets sets(n_users + r.cols());
  for (std::size_t u = 0; u < n_users; ++u) {
    for (Index i : r.row(u).indices) sets.unite(u, n_users + i);
  }
  ComponentLabeling out;
  const std::size_t n = n_users + r.cols();
  out.labels.resize(n);
  std::vector<std::size_t> label_of_root(n, SIZE_MAX);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t root = sets.find(v);
    if (label_of_root[root] == SIZE_MAX) {
      label_of_root[root] = out.sizes.size();
      out.sizes.push_back(0);
    }
    out.labels[v] = label_of_root[root];
    ++out.sizes[out.labels[v]];
  }
  return out;
}

StochasticMatrix build_h(const SparseMatrix& r) {
  require_nonzero_lines(r);
  const std::size_t n_users = r.rows();
  const std::size_t n = n_users + r.cols();
  std::vector<Triplet> t;
  t.reserve(2 * r.nnz());
  for (std::size_t u = 0; u < n_users; ++u) {
    const auto row = r.row(u);
    const double w = 1.0 / double(row.size());
    for (Index i : row.indices) t.push_back({Index(u), Index(n_users + i), w});
  }
  for (std::size_t i = 0; i < r.cols(); ++i) {
    const auto col = r.col(i);
    const double w = 1.0 / double(col.size());
    for (Index u : col.indices) t.push_back({Index(n_users + i), u, w});
  }
  return StochasticMatrix(SparseMatrix(n, n, std::move(t)));
}

StochasticMatrix stochasticity_adjust(const SparseMatrix& w) {
  if (w.rows() != w.cols()) throw Error(ErrorCode::DimensionMismatch, "item model is not square");
  const double scale = w.max_row_sum();
  if (!(scale > 0.0)) throw Error(ErrorCode::EmptyModel, "item model has no positive weight");
  std::vector<Triplet> t;
  t.reserve(w.nnz() + w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const auto row = w.row(i);
    double sum = 0.0;
    double diag = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double v = row.values[k] / scale;
      sum += v;
      if (row.indices[k] == i) {
        diag = v;
      } else {
        t.push_back({Index(i), row.indices[k], v});
      }
    }
    double residual = 1.0 - sum;
    if (residual < 0.0) {
      if (residual < -1e-12) {
        throw Error(ErrorCode::NotStochastic, "negative residual in row " + std::to_string(i));
      }
      residual = 0.0;
    }
    t.push_back({Index(i), Index(i), diag + residual});
  }
  return StochasticMatrix(SparseMatrix(w.rows(), w.cols(), std::move(t)));
}

RecWalkModel build_p(const SparseMatrix& r, const SparseMatrix& w, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (w.rows() != r.cols() || w.cols() != r.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "item model order differs from item count");
  }
  const auto components = check_connectivity(r);
  if (!components.connected()) {
    std::string sizes;
    for (std::size_t k = 0; k < components.sizes.size() && k < 10; ++k) {
      sizes += (k ? ", " : "") + std::to_string(components.sizes[k]);
    }
    if (components.sizes.size() > 10) sizes += ", ...";
    throw Error(ErrorCode::DisconnectedGraph,
                std::to_string(components.count()) + " components of sizes [" + sizes +
                    "]; restrict to the giant component first");
  }

  RecWalkModel model;
  model.alpha = alpha;
  model.num_users = r.rows();
  model.num_items = r.cols();
  model.h = build_h(r);
  model.m_items = stochasticity_adjust(w);

  const std::size_t n_users = r.rows();
  const std::size_t n = model.order();
  const auto& h = model.h.matrix();
  const auto& m = model.m_items.matrix();
  std::vector<Triplet> t;
  t.reserve(h.nnz() + m.nnz() + n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    t.push_back({Index(u), Index(u), 1.0 - alpha});
    const auto row = h.row(u);
    for (std::size_t k = 0; k < row.size(); ++k) {
      t.push_back({Index(u), row.indices[k], alpha * row.values[k]});
    }
  }
  for (std::size_t i = 0; i < r.cols(); ++i) {
    const std::size_t node = n_users + i;
    const auto hrow = h.row(node);
    for (std::size_t k = 0; k < hrow.size(); ++k) {
      t.push_back({Index(node), hrow.indices[k], alpha * hrow.values[k]});
    }
    const auto mrow = m.row(i);
    for (std::size_t k = 0; k < mrow.size(); ++k) {
      t.push_back({Index(node), Index(n_users + mrow.indices[k]), (1.0 - alpha) * mrow.values[k]});
    }
  }
  model.p = StochasticMatrix(SparseMatrix(n, n, std::move(t)));
  return model;
}

DenseVector structural_vector(std::size_t num_users, std::size_t num_items) {
  DenseVector v(num_users + num_items, -1.0);
  std::fill(v.begin(), v.begin() + std::ptrdiff_t(num_users), 1.0);
  return v;
}

}  // namespace recwalk
