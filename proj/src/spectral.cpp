#include "recwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "recwalk/error.hpp"

namespace recwalk {

Partition::Partition(std::size_t order, std::vector<std::vector<std::size_t>> blocks)
    : block_of_(order, SIZE_MAX), num_blocks_(blocks.size()) {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) {
      throw Error(ErrorCode::InvalidPartition, "block " + std::to_string(b) + " is empty");
    }
    for (std::size_t s : blocks[b]) {
      if (s >= order) throw Error(ErrorCode::InvalidPartition, "state out of range");
      if (block_of_[s] != SIZE_MAX) {
        throw Error(ErrorCode::InvalidPartition, "state " + std::to_string(s) + " in two blocks");
      }
      block_of_[s] = b;
    }
  }
  for (std::size_t s = 0; s < order; ++s) {
    if (block_of_[s] == SIZE_MAX) {
      throw Error(ErrorCode::InvalidPartition, "state " + std::to_string(s) + " in no block");
    }
  }
}

Partition Partition::canonical(std::size_t num_users, std::size_t num_items) {
  std::vector<std::vector<std::size_t>> blocks;
  blocks.reserve(num_users + 1);
  for (std::size_t u = 0; u < num_users; ++u) blocks.push_back({u});
  std::vector<std::size_t> items(num_items);
  for (std::size_t i = 0; i < num_items; ++i) items[i] = num_users + i;
  if (!items.empty()) blocks.push_back(std::move(items));
  return Partition(num_users + num_items, std::move(blocks));
}

CouplingReport coupling_degree(const StochasticMatrix& p, const Partition& partition) {
  const auto& m = p.matrix();
  if (partition.order() != m.rows()) {
    throw Error(ErrorCode::InvalidPartition, "partition order differs from matrix order");
  }
  CouplingReport report;
  report.leaks.resize(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    const std::size_t home = partition.block_of(i);
    double leak = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (partition.block_of(row.indices[k]) != home) leak += row.values[k];
    }
    report.leaks[i] = leak;
    report.epsilon = std::max(report.epsilon, leak);
  }
  return report;
}

double eigenpair_residual(const SparseMatrix& p, std::span<const double> v, double lambda) {
  const auto pv = mat_vec(p, v);
  double worst = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    worst = std::max(worst, std::abs(pv[i] - lambda * v[i]));
  }
  return worst;
}

double structural_eigenpair_residual(const RecWalkModel& model) {
  const auto v = structural_vector(model.num_users, model.num_items);
  return eigenpair_residual(model.p.matrix(), v, 1.0 - 2.0 * model.alpha);
}

std::size_t SpectrumReport::count_near_one(double radius) const {
  return std::size_t(std::count_if(eigenvalues.begin(), eigenvalues.end(), [&](const auto& z) {
    return std::abs(1.0 - z) <= radius;
  }));
}

SpectrumReport dense_spectrum(const SparseMatrix& p, std::size_t max_order) {
  if (p.rows() != p.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  if (p.rows() > max_order) {
    throw Error(ErrorCode::TooLarge, "order " + std::to_string(p.rows()) + " exceeds " +
                                         std::to_string(max_order));
  }
  const auto n = static_cast<Eigen::Index>(p.rows());
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : p.triplets()) dense(t.row, t.col) = t.value;

  SpectrumReport report;
  report.method = "dense";
  report.order = p.rows();
  if (n > 0) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::NotConverged, "dense eigensolver failed");
    }
    const auto& ev = solver.eigenvalues();
    report.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  }
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              const double ma = std::abs(a), mb = std::abs(b);
              if (ma != mb) return ma > mb;
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });
  return report;
}

SpectrumReport dense_spectrum(const StochasticMatrix& p, std::size_t max_order) {
  return dense_spectrum(p.matrix(), max_order);
}

DenseVector stationary_distribution(const StochasticMatrix& p, double tol, std::size_t max_iters) {
  const std::size_t n = p.order();
  DenseVector x(n, 1.0 / double(n));
  for (std::size_t k = 0; k < max_iters; ++k) {
    auto next = vec_mat(x, p);
    const double total = norm1(next);
    for (double& v : next) v /= total;
    const double change = norm1_diff(next, x);
    x = std::move(next);
    if (change < tol) return x;
  }
  throw Error(ErrorCode::NotConverged, "stationary distribution power iteration");
}

double subdominant_modulus(const StochasticMatrix& p, const SubdominantOptions& opts) {
  const std::size_t n = p.order();
  if (n < 2) return 0.0;
  const auto pi = stationary_distribution(p);
  const auto m = static_cast<Eigen::Index>(std::clamp<std::size_t>(opts.krylov_dim, 2, n - 1));

  // Rows summing to zero stay that way under P; projecting the sum out again
  // only removes rounding drift toward pi.
  auto deflate = [&](Eigen::VectorXd& z) {
    const double s = z.sum();
    for (std::size_t i = 0; i < n; ++i) z(Eigen::Index(i)) -= s * pi[i];
  };
  auto apply = [&](const Eigen::VectorXd& z) {
    const auto y = vec_mat(std::span<const double>(z.data(), n), p);
    Eigen::VectorXd out = Eigen::Map<const Eigen::VectorXd>(y.data(), Eigen::Index(n));
    deflate(out);
    return out;
  };

  std::mt19937_64 rng(opts.seed);
  Eigen::VectorXd start(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < start.size(); ++i) start(i) = double(rng() >> 11) * 0x1.0p-53 - 0.5;
  deflate(start);

  double previous = -1.0;
  std::size_t products = 0;
  Eigen::MatrixXd v(start.size(), m + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  while (products < opts.max_iters) {
    const double norm = start.norm();
    if (norm < 1e-300) return 0.0;
    v.col(0) = start / norm;
    h.setZero();
    Eigen::Index built = m;
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::VectorXd w = apply(v.col(j));
      ++products;
      const double scale = w.norm();
      for (int pass = 0; pass < 2; ++pass) {  // Gram-Schmidt, twice for stability
        for (Eigen::Index i = 0; i <= j; ++i) {
          const double c = v.col(i).dot(w);
          h(i, j) += c;
          w -= c * v.col(i);
        }
      }
      h(j + 1, j) = w.norm();
      if (h(j + 1, j) <= 1e-13 * std::max(scale, 1.0)) {  // invariant subspace
        built = j + 1;
        break;
      }
      v.col(j + 1) = w / h(j + 1, j);
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(built, built), true);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NotConverged, "Ritz value solve failed");
    Eigen::Index lead = 0;
    for (Eigen::Index k = 1; k < built; ++k) {
      if (std::abs(es.eigenvalues()(k)) > std::abs(es.eigenvalues()(lead))) lead = k;
    }
    const double estimate = std::abs(es.eigenvalues()(lead));
    if (built < m) return estimate < 1e-12 ? 0.0 : estimate;
    if (previous >= 0.0 && std::abs(estimate - previous) <= opts.tol * std::max(estimate, 1e-300)) {
      return estimate;
    }
    previous = estimate;
    // Restart from the leading Ritz vector; real and imaginary parts together
    // span both members of a conjugate pair.
    const Eigen::VectorXcd y = es.eigenvectors().col(lead);
    start = v.leftCols(built) * (y.real() + y.imag());
    deflate(start);
  }
  throw Error(ErrorCode::NotConverged, "subdominant modulus estimate did not settle");
}

std::vector<DriftPoint> landing_drift(const RecWalkModel& model, std::span<const std::size_t> users,
                                      std::size_t max_steps) {
  if (users.empty()) throw Error(ErrorCode::InvalidParameter, "no users to compare");
  const auto pi = stationary_distribution(model.p);
  std::vector<DenseVector> x;
  x.reserve(users.size());
  for (std::size_t u : users) {
    if (u >= model.num_users) throw Error(ErrorCode::DimensionMismatch, "user out of range");
    x.push_back(unit_vector(model.order(), u));
  }
  std::vector<DriftPoint> out;
  for (std::size_t k = 0; k <= max_steps; ++k) {
    if (k > 0) {
      for (auto& v : x) v = vec_mat(v, model.p);
    }
    DriftPoint point;
    point.step = k;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      point.to_stationary += norm1_diff(x[a], pi);
      for (std::size_t b = a + 1; b < x.size(); ++b) {
        point.pairwise += norm1_diff(x[a], x[b]);
        ++pairs;
      }
    }
    point.to_stationary /= double(x.size());
    if (pairs) point.pairwise /= double(pairs);
    out.push_back(point);
  }
  return out;
}

}  // namespace recwalk
