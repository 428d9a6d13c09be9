#include "recwalk/item_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "recwalk/error.hpp"

namespace recwalk {

namespace {

// Dot products of column i with every column of r, accumulated user by user
// in ascending user order.
void column_dots(const SparseMatrix& r, std::size_t i, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto ci = r.col(i);
  for (std::size_t p = 0; p < ci.size(); ++p) {
    const auto row = r.row(ci.indices[p]);
    const double w = ci.values[p];
    for (std::size_t q = 0; q < row.size(); ++q) out[row.indices[q]] += w * row.values[q];
  }
}

NeighborSet select_neighbors(std::size_t i, std::size_t c, std::span<const double> dots,
                             std::span<const double> sq_norms) {
  const std::size_t n = dots.size();
  std::vector<double> sim(n, 0.0);
  std::vector<Index> cand;
  cand.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    sim[j] = dots[j] == 0.0 ? 0.0 : dots[j] / (std::sqrt(sq_norms[i]) * std::sqrt(sq_norms[j]));
    cand.push_back(Index(j));
  }
  c = std::min(c, cand.size());
  auto better = [&](Index a, Index b) { return sim[a] != sim[b] ? sim[a] > sim[b] : a < b; };
  std::partial_sort(cand.begin(), cand.begin() + std::ptrdiff_t(c), cand.end(), better);
  NeighborSet set;
  set.item = Index(i);
  set.neighbors.assign(cand.begin(), cand.begin() + std::ptrdiff_t(c));
  for (Index j : set.neighbors) set.similarities.push_back(sim[j]);
  return set;
}

std::vector<double> column_sq_norms(const SparseMatrix& r) {
  std::vector<double> sq(r.cols());
  for (std::size_t j = 0; j < r.cols(); ++j) {
    const auto c = r.col(j);
    sq[j] = sparse_dot(c, c);
    if (c.size() == 0) throw Error(ErrorCode::ZeroColumn, "item " + std::to_string(j));
  }
  return sq;
}

struct ColumnFit {
  std::vector<Index> neighbors;
  FitResult fit;
};

SolverOptions solver_options(const ItemModelParams& p) {
  return {p.l1, p.l2, p.tol, p.max_iters, false};
}

// Gram block and right-hand side from sparse column products.
ColumnFit fit_column_sparse(const SparseMatrix& r, std::size_t i, std::size_t c,
                            std::span<const double> sq_norms, std::span<double> scratch,
                            const SolverOptions& opts) {
  column_dots(r, i, scratch);
  ColumnFit out;
  out.neighbors = select_neighbors(i, c, scratch, sq_norms).neighbors;
  const std::size_t k = out.neighbors.size();
  std::vector<double> gram(k * k), rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    const auto ca = r.col(out.neighbors[a]);
    rhs[a] = scratch[out.neighbors[a]];
    for (std::size_t b = a; b < k; ++b) {
      const double d = sparse_dot(ca, r.col(out.neighbors[b]));
      gram[a * k + b] = d;
      gram[b * k + a] = d;
    }
  }
  out.fit = solve_nonneg_elastic_net(gram, rhs, sq_norms[i], opts);
  return out;
}

// Same problem with the Gram block gathered from a precomputed co-occurrence
// matrix.
ColumnFit fit_column_dense(const std::vector<double>& cooc, std::size_t n_items, std::size_t i,
                           std::size_t c, std::span<const double> sq_norms,
                           const SolverOptions& opts) {
  const std::span<const double> dots(cooc.data() + i * n_items, n_items);
  ColumnFit out;
  out.neighbors = select_neighbors(i, c, dots, sq_norms).neighbors;
  const std::size_t k = out.neighbors.size();
  std::vector<double> gram(k * k), rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    const double* row = cooc.data() + std::size_t(out.neighbors[a]) * n_items;
    rhs[a] = dots[out.neighbors[a]];
    for (std::size_t b = 0; b < k; ++b) gram[a * k + b] = row[out.neighbors[b]];
  }
  out.fit = solve_nonneg_elastic_net(gram, rhs, sq_norms[i], opts);
  return out;
}

ItemModel assemble(std::size_t n_items, const ItemModelParams& params, std::size_t c,
                   std::vector<ColumnFit>& fits) {
  ItemModel model;
  model.neighbors = c;
  model.l1 = params.l1;
  model.l2 = params.l2;
  model.stats.resize(n_items);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n_items; ++i) {
    const auto& f = fits[i];
    for (std::size_t a = 0; a < f.neighbors.size(); ++a) {
      if (f.fit.x[a] > 0.0) t.push_back({f.neighbors[a], Index(i), f.fit.x[a]});
    }
    model.stats[i] = {f.fit.iterations, f.fit.objective, f.fit.converged};
  }
  model.w = SparseMatrix(n_items, n_items, std::move(t));
  return model;
}

void check_params(const ItemModelParams& p) {
  if (!(p.l1 >= 0.0) || !(p.l2 >= 0.0) || !(p.tol > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "penalties must be >= 0 and tol > 0");
  }
}

}  // namespace

NeighborCount NeighborCount::parse(const std::string& text) {
  std::string body = text;
  NeighborCount nc;
  if (!body.empty() && body.back() == '%') {
    nc.percent = true;
    body.pop_back();
  }
  double v = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), v);
  if (res.ec != std::errc() || res.ptr != body.data() + body.size() || !(v > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "neighbor count '" + text + "'");
  }
  if (!nc.percent && v != std::floor(v)) {
    throw Error(ErrorCode::InvalidParameter, "absolute neighbor count must be an integer");
  }
  nc.value = v;
  return nc;
}

std::size_t NeighborCount::resolve(std::size_t num_items) const {
  if (num_items < 2) return 0;
  const double raw = percent ? std::ceil(value / 100.0 * double(num_items)) : value;
  const auto c = static_cast<std::size_t>(std::max(raw, 1.0));
  return std::min(c, num_items - 1);
}

std::string NeighborCount::to_string() const {
  std::ostringstream os;
  os << value;
  if (percent) os << '%';
  return os.str();
}

NeighborSet top_c_neighbors(const SparseMatrix& r, std::size_t i, std::size_t c) {
  if (i >= r.cols()) throw Error(ErrorCode::DimensionMismatch, "item out of range");
  if (r.col(i).size() == 0) throw Error(ErrorCode::ZeroColumn, "item " + std::to_string(i));
  std::vector<double> sq(r.cols());
  for (std::size_t j = 0; j < r.cols(); ++j) {
    const auto cj = r.col(j);
    sq[j] = sparse_dot(cj, cj);
  }
  std::vector<double> dots(r.cols());
  column_dots(r, i, dots);
  return select_neighbors(i, c, dots, sq);
}

double elastic_net_objective(std::span<const double> gram, std::span<const double> rhs,
                             double target_sq, std::span<const double> x, double l1, double l2) {
  const std::size_t n = rhs.size();
  double quad = 0.0, lin = 0.0, l1n = 0.0, l2n = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double gx = 0.0;
    for (std::size_t b = 0; b < n; ++b) gx += gram[a * n + b] * x[b];
    quad += x[a] * gx;
    lin += rhs[a] * x[a];
    l1n += std::abs(x[a]);
    l2n += x[a] * x[a];
  }
  return 0.5 * target_sq - lin + 0.5 * quad + l1 * l1n + 0.5 * l2 * l2n;
}

FitResult solve_nonneg_elastic_net(std::span<const double> gram, std::span<const double> rhs,
                                   double target_sq, const SolverOptions& opts) {
  const std::size_t n = rhs.size();
  if (gram.size() != n * n) throw Error(ErrorCode::DimensionMismatch, "gram block size");
  FitResult res;
  res.x.assign(n, 0.0);
  std::vector<double> gx(n, 0.0);  // gram * x, kept current

  auto objective = [&] {
    double v = 0.5 * target_sq;
    for (std::size_t a = 0; a < n; ++a) {
      const double xa = res.x[a];
      v += -rhs[a] * xa + 0.5 * xa * gx[a] + opts.l1 * xa + 0.5 * opts.l2 * xa * xa;
    }
    return v;
  };

  for (std::size_t sweep = 0; sweep < opts.max_iters; ++sweep) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double gjj = gram[j * n + j];
      const double denom = gjj + opts.l2;
      const double old = res.x[j];
      double next = 0.0;
      if (denom > 0.0) {
        const double partial = rhs[j] - (gx[j] - gjj * old) - opts.l1;
        next = std::max(0.0, partial / denom);
      }
      const double delta = next - old;
      if (delta != 0.0) {
        const double* gj = gram.data() + j * n;
        for (std::size_t k = 0; k < n; ++k) gx[k] += delta * gj[k];
        res.x[j] = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    ++res.iterations;
    if (opts.track_objective) res.objective_trace.push_back(objective());
    if (max_change < opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.objective = objective();
  return res;
}

FitResult fit_column(std::span<const double> target, const SparseMatrix& columns,
                     const SolverOptions& opts) {
  if (target.size() != columns.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "target length differs from column height");
  }
  const std::size_t k = columns.cols();
  std::vector<double> gram(k * k), rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    const auto ca = columns.col(a);
    if (ca.size() == 0) throw Error(ErrorCode::ZeroColumn, "selected column " + std::to_string(a));
    double s = 0.0;
    for (std::size_t p = 0; p < ca.size(); ++p) s += ca.values[p] * target[ca.indices[p]];
    rhs[a] = s;
    for (std::size_t b = a; b < k; ++b) {
      const double d = sparse_dot(ca, columns.col(b));
      gram[a * k + b] = d;
      gram[b * k + a] = d;
    }
  }
  double target_sq = 0.0;
  for (double v : target) target_sq += v * v;
  return solve_nonneg_elastic_net(gram, rhs, target_sq, opts);
}

std::size_t ItemModel::unconverged() const {
  return std::size_t(
      std::count_if(stats.begin(), stats.end(), [](const ColumnStats& s) { return !s.converged; }));
}

ItemModel build_item_model(const SparseMatrix& r, const ItemModelParams& params) {
  check_params(params);
  const std::size_t n_items = r.cols();
  const std::size_t c = params.neighbors.resolve(n_items);
  const auto sq = column_sq_norms(r);
  const auto opts = solver_options(params);
  const int threads = params.threads > 0 ? params.threads : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(n_items);
  std::vector<ColumnFit> fits(n_items);

  if (n_items <= params.dense_gram_limit) {
    std::vector<double> cooc(n_items * n_items);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      column_dots(r, std::size_t(i), std::span(cooc.data() + std::size_t(i) * n_items, n_items));
    }
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      fits[std::size_t(i)] = fit_column_dense(cooc, n_items, std::size_t(i), c, sq, opts);
    }
  } else {
#pragma omp parallel num_threads(threads)
    {
      std::vector<double> scratch(n_items);
#pragma omp for schedule(dynamic, 4)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        fits[std::size_t(i)] = fit_column_sparse(r, std::size_t(i), c, sq, scratch, opts);
      }
    }
  }
  return assemble(n_items, params, c, fits);
}

namespace reference {

ItemModel build_item_model(const SparseMatrix& r, const ItemModelParams& params) {
  check_params(params);
  const std::size_t n_items = r.cols();
  const std::size_t c = params.neighbors.resolve(n_items);
  const auto sq = column_sq_norms(r);
  const auto opts = solver_options(params);
  std::vector<double> scratch(n_items);
  std::vector<ColumnFit> fits(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    fits[i] = fit_column_sparse(r, i, c, sq, scratch, opts);
  }
  return assemble(n_items, params, c, fits);
}

}  // namespace reference

}  // namespace recwalk
