#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "recwalk/error.hpp"
#include "recwalk/item_model.hpp"
#include "support/oracles.hpp"

using namespace recwalk;
using namespace recwalk::testing;

namespace {

// Problem data for column `target` regressed on `cols` of a dense matrix.
QuadProblem dense_problem(const Eigen::MatrixXd& r, Eigen::Index target,
                          const std::vector<Index>& cols) {
  Eigen::MatrixXd n(r.rows(), Eigen::Index(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) n.col(Eigen::Index(k)) = r.col(cols[k]);
  QuadProblem q;
  q.gram = n.transpose() * n;
  q.rhs = n.transpose() * r.col(target);
  q.target_sq = r.col(target).squaredNorm();
  return q;
}

std::vector<Index> brute_force_neighbors(const Eigen::MatrixXd& r, Eigen::Index i, std::size_t c) {
  std::vector<std::pair<double, Index>> sims;
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    if (j == i) continue;
    const double n = r.col(i).norm() * r.col(j).norm();
    sims.emplace_back(n > 0 ? r.col(i).dot(r.col(j)) / n : 0.0, Index(j));
  }
  std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<Index> out;
  for (std::size_t k = 0; k < std::min(c, sims.size()); ++k) out.push_back(sims[k].second);
  return out;
}

SparseMatrix random_binary(std::size_t rows, std::size_t cols, double density, std::mt19937_64& rng) {
  return random_connected_binary(rows, cols, density, rng);
}

}  // namespace

TEST_CASE("neighbor counts resolve against the item count") {
  CHECK(NeighborCount::parse("2.5%").resolve(3706) == 93);
  CHECK(NeighborCount::parse("25%").resolve(3706) == 927);
  CHECK(NeighborCount::parse("50").resolve(3706) == 50);
  CHECK(NeighborCount::parse("50").resolve(10) == 9);
  CHECK(NeighborCount::parse("0.01%").resolve(10) == 1);
  CHECK(NeighborCount::parse("7").resolve(1) == 0);
  CHECK_THROWS_AS(NeighborCount::parse("2.5"), Error);
  CHECK_THROWS_AS(NeighborCount::parse("abc"), Error);
  CHECK_THROWS_AS(NeighborCount::parse("-3"), Error);
  CHECK(NeighborCount::parse("7.5%").to_string() == "7.5%");
}

TEST_CASE("top_c_neighbors examples") {
  SUBCASE("two items") {
    SparseMatrix r(1, 2, {{0, 0, 1}, {0, 1, 1}});
    const auto n = top_c_neighbors(r, 0, 5);
    REQUIRE(n.neighbors.size() == 1);
    CHECK(n.neighbors[0] == 1);
  }
  SUBCASE("duplicate columns tie toward the lower index") {
    // items 1 and 2 are identical copies of item 0
    SparseMatrix r(3, 4, {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}, {0, 2, 1}, {1, 2, 1}, {2, 3, 1}});
    const auto n = top_c_neighbors(r, 0, 1);
    REQUIRE(n.neighbors.size() == 1);
    CHECK(n.neighbors[0] == 1);
    const auto n3 = top_c_neighbors(r, 3, 2);
    CHECK(n3.neighbors == std::vector<Index>{0, 1});  // all zero similarity
    CHECK(n3.similarities == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("empty column") {
    SparseMatrix r(1, 2, {{0, 0, 1}});
    CHECK_THROWS_AS(top_c_neighbors(r, 1, 1), Error);
  }
}

TEST_CASE("top_c_neighbors matches exhaustive similarity sort") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const auto r = random_binary(8, 6, 0.4, rng);
    const auto d = dense(r);
    for (std::size_t i = 0; i < 6; ++i) {
      const auto n = top_c_neighbors(r, i, 3);
      CHECK(n.neighbors == brute_force_neighbors(d, Eigen::Index(i), 3));
      CHECK(std::is_sorted(n.similarities.rbegin(), n.similarities.rend()));
      CHECK(std::find(n.neighbors.begin(), n.neighbors.end(), Index(i)) == n.neighbors.end());
    }
  }
}

TEST_CASE("fit_column examples") {
  SUBCASE("a large l1 penalty zeroes every coordinate") {
    SparseMatrix n(3, 2, {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {2, 1, 1}});
    const DenseVector r{1, 1, 1};
    // n_j' r = 2 for both columns
    const auto res = fit_column(r, n, {2.0, 0.5, 1e-10, 1000, false});
    CHECK(res.x == std::vector<double>{0.0, 0.0});
    CHECK(res.converged);
  }
  SUBCASE("exact self reconstruction") {
    SparseMatrix n(3, 1, {{0, 0, 1}, {2, 0, 1}});
    const DenseVector r{1, 0, 1};
    const auto res = fit_column(r, n, {0.0, 0.0, 1e-12, 1000, false});
    REQUIRE(res.x.size() == 1);
    CHECK(res.x[0] == 1.0);
    CHECK(res.objective == doctest::Approx(0.0));
  }
  SUBCASE("dimension mismatch") {
    SparseMatrix n(3, 1, {{0, 0, 1}});
    CHECK_THROWS_AS(fit_column(DenseVector{1, 0}, n, {}), Error);
  }
  SUBCASE("iteration cap is reported, not thrown") {
    SparseMatrix n(3, 2, {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {2, 1, 1}});
    const auto res = fit_column(DenseVector{1, 1, 1}, n, {0.0, 0.0, 1e-300, 2, false});
    CHECK(!res.converged);
    CHECK(res.iterations == 2);
  }
}

TEST_CASE("fit_column matches a projected-gradient oracle on a random 10x4 problem") {
  std::mt19937_64 rng(10);
  std::bernoulli_distribution coin(0.5);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(10, 5);
  for (Eigen::Index i = 0; i < 10; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) r(i, j) = coin(rng);
  for (Eigen::Index j = 0; j < 5; ++j) r(j, j) = 1.0;
  const std::vector<Index> cols{1, 2, 3, 4};
  const auto q = dense_problem(r, 0, cols);
  const auto oracle = projected_gradient(q, 0.1, 0.5, 1e-10);

  Eigen::MatrixXd n(10, 4);
  for (Eigen::Index k = 0; k < 4; ++k) n.col(k) = r.col(k + 1);
  const Eigen::VectorXd target = r.col(0);
  const auto res = fit_column(to_std(target), sparse_from_dense(n), {0.1, 0.5, 1e-12, 100000, false});
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(res.x.data(), 4);
  CHECK(std::abs(res.objective - quad_objective(q, oracle, 0.1, 0.5)) <= 1e-8);
  CHECK(kkt_violation(q, x, 0.1, 0.5) <= 1e-6);
  for (double v : res.x) CHECK(v >= 0.0);
}

TEST_CASE("coordinate descent objective never increases across sweeps (property)") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pen(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_binary(15, 7, 0.35, rng);
    const auto d = dense(r);
    const auto cols = brute_force_neighbors(d, 0, 6);
    const auto q = dense_problem(d, 0, cols);
    std::vector<double> gram(q.gram.data(), q.gram.data() + q.gram.size());
    const auto res = solve_nonneg_elastic_net(gram, to_std(q.rhs), q.target_sq,
                                              {pen(rng), pen(rng), 1e-9, 1000, true});
    for (std::size_t k = 1; k < res.objective_trace.size(); ++k) {
      CHECK(res.objective_trace[k] <= res.objective_trace[k - 1] + 1e-12);
    }
  }
}

TEST_CASE("build_item_model examples") {
  ItemModelParams p;
  p.neighbors = NeighborCount::absolute(2);
  p.l1 = 0.1;
  p.l2 = 0.1;

  SUBCASE("items sharing no users give an empty model") {
    const auto m = build_item_model(SparseMatrix::identity(4), p);
    CHECK(m.w.nnz() == 0);
    CHECK(m.w.rows() == 4);
  }
  SUBCASE("two identical columns get symmetric weights") {
    SparseMatrix r(3, 3, {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}, {2, 2, 1}});
    p.neighbors = NeighborCount::absolute(1);
    p.l1 = 0.01;
    p.l2 = 10.0;
    const auto m = build_item_model(r, p);
    CHECK(m.w.at(1, 0) > 0.0);
    CHECK(m.w.at(1, 0) == m.w.at(0, 1));
  }
  SUBCASE("zero column is rejected") {
    SparseMatrix r(2, 3, {{0, 0, 1}, {1, 1, 1}});
    CHECK_THROWS_AS(build_item_model(r, p), Error);
  }
  SUBCASE("negative penalties are rejected") {
    p.l1 = -1.0;
    CHECK_THROWS_AS(build_item_model(SparseMatrix::identity(3), p), Error);
  }
}

TEST_CASE("build_item_model matches per-column oracle solves on a 6-item dataset") {
  std::mt19937_64 rng(6);
  const auto r = random_binary(12, 6, 0.45, rng);
  const auto d = dense(r);
  ItemModelParams p;
  p.neighbors = NeighborCount::absolute(3);
  p.l1 = 0.3;
  p.l2 = 0.7;
  p.tol = 1e-12;
  p.max_iters = 100000;
  const auto model = build_item_model(r, p);
  const auto wd = dense(model.w);
  for (Eigen::Index i = 0; i < 6; ++i) {
    const auto cols = brute_force_neighbors(d, i, 3);
    const auto q = dense_problem(d, i, cols);
    const auto oracle = projected_gradient(q, 0.3, 0.7, 1e-13);
    Eigen::VectorXd x(Eigen::Index(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) x(Eigen::Index(k)) = wd(cols[k], i);
    CHECK((x - oracle).cwiseAbs().maxCoeff() <= 1e-8);
    // nothing outside the neighborhood
    double outside = 0.0;
    for (Eigen::Index j = 0; j < 6; ++j)
      if (std::find(cols.begin(), cols.end(), Index(j)) == cols.end()) outside += wd(j, i);
    CHECK(outside == 0.0);
  }
}

TEST_CASE("item model invariants and determinism (property)") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = clustered_interactions(40, 25, 3, 6, rng);
    ItemModelParams p;
    p.neighbors = NeighborCount::absolute(1 + rng() % 8);
    p.l1 = 0.5;
    p.l2 = 1.0;
    const std::size_t c = p.neighbors.resolve(25);

    p.threads = 1;
    const auto one = build_item_model(r, p);
    p.threads = 4;
    const auto four = build_item_model(r, p);
    const auto ref = reference::build_item_model(r, p);
    p.dense_gram_limit = 0;  // per-column sparse Gram path
    const auto sparse_path = build_item_model(r, p);

    CHECK(one.w == four.w);
    CHECK(one.w == ref.w);
    CHECK(one.w == sparse_path.w);
    CHECK(one.unconverged() == 0);
    for (std::size_t i = 0; i < 25; ++i) {
      CHECK(one.w.at(i, i) == 0.0);
      CHECK(one.w.col(i).size() <= c);
    }
    for (double v : one.w.row_values()) CHECK(v > 0.0);
  }
}
