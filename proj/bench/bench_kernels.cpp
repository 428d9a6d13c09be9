// Serial reference implementations against the OpenMP kernels on a
// synthetic clustered dataset. Usage: bench_kernels [users] [items] [per_user] [reps]

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#include "recwalk/dataset.hpp"
#include "recwalk/item_model.hpp"
#include "recwalk/metrics.hpp"
#include "recwalk/recommender.hpp"
#include "recwalk/walk_model.hpp"

using namespace recwalk;

namespace {

SparseMatrix synthetic(std::size_t users, std::size_t items, std::size_t per_user, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t groups = 8;
  std::vector<Triplet> t;
  for (std::size_t u = 0; u < users; ++u) {
    const std::size_t g = u % groups;
    for (std::size_t k = 0; k < per_user; ++k) {
      std::size_t i = unit(rng) < 0.8
                          ? g + groups * std::size_t(std::pow(unit(rng), 2.0) * double(items / groups))
                          : std::size_t(std::pow(unit(rng), 2.0) * double(items));
      t.push_back({Index(u), Index(std::min(i, items - 1)), 1.0});
    }
  }
  for (std::size_t i = 0; i < items; ++i) t.push_back({Index(i % users), Index(i), 1.0});
  return SparseMatrix(users, items, std::move(t), Duplicates::Binarize);
}

double best_of(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto a = std::chrono::steady_clock::now();
    f();
    const auto b = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(b - a).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-22s %12.4f %12.4f %9.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t users = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 3000;
  const std::size_t items = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 1500;
  const std::size_t per_user = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 40;
  const int reps = argc > 4 ? std::atoi(argv[4]) : 3;

  const auto r = synthetic(users, items, per_user, 1);
  const auto split = leave_one_out(r, 1, 99);
  std::printf("users %zu  items %zu  nnz %zu  threads %d\n\n", users, items, r.nnz(),
              omp_get_max_threads());
  std::printf("%-22s %12s %12s %10s\n", "kernel", "serial [s]", "openmp [s]", "speedup");

  ItemModelParams params;
  params.neighbors = NeighborCount::of_items(5.0);
  params.l1 = 1.0;
  params.l2 = 1.0;
  ItemModel model;
  const double item_serial = best_of(reps, [&] { reference::build_item_model(split.train, params); });
  // The first row includes the cached co-occurrence Gram; the second turns it
  // off so only the threading differs from the reference.
  row("item model", item_serial, best_of(reps, [&] { model = build_item_model(split.train, params); }));
  ItemModelParams uncached = params;
  uncached.dense_gram_limit = 0;
  row("item model, no cache", item_serial,
      best_of(reps, [&] { build_item_model(split.train, uncached); }));

  const auto walk = build_p(split.train, model.w, 0.005);
  DenseVector x(walk.order(), 1.0 / double(walk.order()));
  volatile double sink = 0.0;
  row("vec_mat x100",
      best_of(reps, [&] {
        for (int k = 0; k < 100; ++k) sink = sink + reference::vec_mat(x, walk.p.matrix())[0];
      }),
      best_of(reps, [&] {
        for (int k = 0; k < 100; ++k) sink = sink + vec_mat(x, walk.p)[0];
      }));

  ScorerParams sp;
  sp.steps = 10;
  const auto scorer = make_scorer(sp, walk, split.train, model.w);
  row("evaluate kstep K=10", best_of(reps, [&] { reference::evaluate(*scorer, split, 10); }),
      best_of(reps, [&] { evaluate(*scorer, split, 10); }));
  return 0;
}
