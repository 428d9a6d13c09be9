#include "recwalk/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recwalk/error.hpp"

namespace recwalk {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::KStep: return "kstep";
    case Strategy::PageRank: return "pr";
    case Strategy::Srw: return "srw";
    case Strategy::PrBaseline: return "pr-base";
    case Strategy::Base: return "base";
    case Strategy::KStepMi: return "kstep-mi";
    case Strategy::PrMi: return "pr-mi";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  for (auto s : {Strategy::KStep, Strategy::PageRank, Strategy::Srw, Strategy::PrBaseline,
                 Strategy::Base, Strategy::KStepMi, Strategy::PrMi}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCode::InvalidParameter, "unknown strategy '" + name + "'");
}

namespace {

void check_damping(double damping) {
  if (!(damping > 0.0 && damping < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "damping must lie in (0, 1)");
  }
}

void check_user(const RecWalkModel& model, std::size_t user) {
  if (user >= model.num_users) {
    throw Error(ErrorCode::DimensionMismatch, "user " + std::to_string(user) + " out of range");
  }
}

}  // namespace

DenseVector landing_distribution(const StochasticMatrix& s, std::span<const double> start,
                                 std::size_t steps) {
  DenseVector x(start.begin(), start.end());
  for (std::size_t k = 0; k < steps; ++k) x = vec_mat(x, s);
  return x;
}

std::size_t pagerank_iteration_cap(double damping, double tol) {
  const double steps = std::ceil(std::log(tol) / std::log(damping));
  return 2 * static_cast<std::size_t>(std::max(steps, 1.0)) + 10;
}

DenseVector restart_walk(const StochasticMatrix& s, std::span<const double> teleport,
                         double damping, double tol) {
  check_damping(damping);
  if (teleport.size() != s.order()) {
    throw Error(ErrorCode::DimensionMismatch, "teleport length differs from matrix order");
  }
  // Mass spreads one hop per iteration, so a small step difference can come
  // before distant nodes are reached at all. The iteration only stops once
  // the support has stopped growing; that takes at most order() extra steps.
  const std::size_t cap = pagerank_iteration_cap(damping, tol) + s.order();
  DenseVector x(teleport.begin(), teleport.end());
  auto support = [](const DenseVector& v) {
    return std::size_t(std::count_if(v.begin(), v.end(), [](double a) { return a > 0.0; }));
  };
  std::size_t reached = support(x);
  for (std::size_t k = 1; k <= cap; ++k) {
    DenseVector next = vec_mat(x, s);
    double total = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) {
      next[j] = damping * next[j] + (1.0 - damping) * teleport[j];
      total += next[j];
    }
    for (double& v : next) v /= total;
    const double change = norm1_diff(next, x);
    const std::size_t now = support(next);
    x = std::move(next);
    if (change < tol && now == reached) return x;
    reached = now;
  }
  throw Error(ErrorCode::NotConverged,
              "restart walk did not converge in " + std::to_string(cap) + " iterations");
}

RecommendationVector kstep(const RecWalkModel& model, std::size_t user, std::size_t steps) {
  check_user(model, user);
  RecommendationVector out;
  out.user = user;
  out.scores = landing_distribution(model.p, unit_vector(model.order(), user), steps);
  out.item_offset = model.num_users;
  out.strategy = Strategy::KStep;
  out.steps = steps;
  return out;
}

RecommendationVector pagerank(const RecWalkModel& model, std::size_t user, double damping,
                              double tol) {
  check_user(model, user);
  RecommendationVector out;
  out.user = user;
  out.scores = restart_walk(model.p, unit_vector(model.order(), user), damping, tol);
  out.item_offset = model.num_users;
  out.strategy = Strategy::PageRank;
  out.damping = damping;
  return out;
}

DenseVector history_distribution(const SparseMatrix& r, std::size_t user) {
  const auto row = r.row(user);
  const double total = row.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroHistory, "user " + std::to_string(user));
  DenseVector phi(r.cols(), 0.0);
  for (std::size_t k = 0; k < row.size(); ++k) phi[row.indices[k]] = row.values[k] / total;
  return phi;
}

RecommendationVector srw_baseline(const StochasticMatrix& s, std::span<const double> phi,
                                  std::size_t steps) {
  if (norm1(phi) == 0.0) throw Error(ErrorCode::ZeroHistory, "empty start distribution");
  RecommendationVector out;
  out.scores = landing_distribution(s, phi, steps);
  out.strategy = Strategy::Srw;
  out.steps = steps;
  return out;
}

RecommendationVector pr_baseline(const StochasticMatrix& s, std::span<const double> phi,
                                 double damping, double tol) {
  if (norm1(phi) == 0.0) throw Error(ErrorCode::ZeroHistory, "empty teleport distribution");
  RecommendationVector out;
  out.scores = restart_walk(s, phi, damping, tol);
  out.strategy = Strategy::PrBaseline;
  out.damping = damping;
  return out;
}

RecommendationVector base_model_scores(const SparseMatrix& w, std::span<const double> history) {
  if (norm1(history) == 0.0) throw Error(ErrorCode::ZeroHistory, "empty history");
  RecommendationVector out;
  out.scores = vec_mat(history, w);
  out.strategy = Strategy::Base;
  return out;
}

StochasticMatrix item_graph_transition(const SparseMatrix& w) {
  const auto sums = w.row_sums();
  auto t = w.triplets();
  for (auto& e : t) e.value /= sums[e.row];
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (!(sums[i] > 0.0)) t.push_back({Index(i), Index(i), 1.0});
  }
  return StochasticMatrix(SparseMatrix(w.rows(), w.cols(), std::move(t)));
}

std::vector<RankedItem> rank_candidates(const RecommendationVector& scores,
                                        std::span<const Index> candidates) {
  std::vector<std::pair<double, Index>> order;
  order.reserve(candidates.size());
  const std::size_t n_items = scores.num_items();
  for (Index c : candidates) {
    if (c >= n_items) throw Error(ErrorCode::DimensionMismatch, "candidate item out of range");
    order.emplace_back(scores.item_score(c), c);
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<RankedItem> out;
  out.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) out.push_back({order[k].second, k + 1});
  return out;
}

std::vector<std::pair<Index, double>> top_n(const RecommendationVector& scores, std::size_t n,
                                            std::span<const Index> exclude) {
  const std::size_t n_items = scores.num_items();
  std::vector<char> skip(n_items, 0);
  for (Index i : exclude) skip.at(i) = 1;
  std::vector<std::pair<Index, double>> items;
  items.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    if (!skip[i]) items.emplace_back(Index(i), scores.item_score(i));
  }
  const auto better = [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  n = std::min(n, items.size());
  std::partial_sort(items.begin(), items.begin() + std::ptrdiff_t(n), items.end(), better);
  items.resize(n);
  return items;
}

namespace {

class WalkScorer final : public Scorer {
 public:
  WalkScorer(const ScorerParams& params, const RecWalkModel& model)
      : params_(params), model_(model) {}

  RecommendationVector score(std::size_t user) const override {
    if (params_.strategy == Strategy::KStep) return kstep(model_, user, params_.steps);
    return pagerank(model_, user, params_.damping, params_.tol);
  }
  std::size_t num_users() const override { return model_.num_users; }
  std::size_t num_items() const override { return model_.num_items; }

 private:
  ScorerParams params_;
  const RecWalkModel& model_;
};

class ItemGraphScorer final : public Scorer {
 public:
  ItemGraphScorer(const ScorerParams& params, const SparseMatrix& train,
                  std::shared_ptr<const StochasticMatrix> transition)
      : params_(params), train_(train), s_(std::move(transition)) {}

  RecommendationVector score(std::size_t user) const override {
    const auto phi = history_distribution(train_, user);
    const bool restart =
        params_.strategy == Strategy::PrBaseline || params_.strategy == Strategy::PrMi;
    auto out = restart ? pr_baseline(*s_, phi, params_.damping, params_.tol)
                       : srw_baseline(*s_, phi, params_.steps);
    out.user = user;
    out.strategy = params_.strategy;
    return out;
  }
  std::size_t num_users() const override { return train_.rows(); }
  std::size_t num_items() const override { return train_.cols(); }

 private:
  ScorerParams params_;
  const SparseMatrix& train_;
  std::shared_ptr<const StochasticMatrix> s_;
};

class BaseScorer final : public Scorer {
 public:
  BaseScorer(const SparseMatrix& train, const SparseMatrix& w) : train_(train), w_(w) {}

  RecommendationVector score(std::size_t user) const override {
    const auto row = train_.row(user);
    DenseVector history(train_.cols(), 0.0);
    for (std::size_t k = 0; k < row.size(); ++k) history[row.indices[k]] = row.values[k];
    auto out = base_model_scores(w_, history);
    out.user = user;
    return out;
  }
  std::size_t num_users() const override { return train_.rows(); }
  std::size_t num_items() const override { return train_.cols(); }

 private:
  const SparseMatrix& train_;
  const SparseMatrix& w_;
};

}  // namespace

std::unique_ptr<Scorer> make_scorer(const ScorerParams& params, const RecWalkModel& model,
                                    const SparseMatrix& train, const SparseMatrix& w) {
  if (train.rows() != model.num_users || train.cols() != model.num_items ||
      w.rows() != model.num_items) {
    throw Error(ErrorCode::IndexMapMismatch, "training matrix does not match the model");
  }
  switch (params.strategy) {
    case Strategy::KStep:
      return std::make_unique<WalkScorer>(params, model);
    case Strategy::PageRank:
      check_damping(params.damping);
      return std::make_unique<WalkScorer>(params, model);
    case Strategy::Srw:
    case Strategy::PrBaseline:
      if (params.strategy == Strategy::PrBaseline) check_damping(params.damping);
      return std::make_unique<ItemGraphScorer>(
          params, train, std::make_shared<const StochasticMatrix>(item_graph_transition(w)));
    case Strategy::KStepMi:
    case Strategy::PrMi:
      if (params.strategy == Strategy::PrMi) check_damping(params.damping);
      return std::make_unique<ItemGraphScorer>(
          params, train,
          std::shared_ptr<const StochasticMatrix>(&model.m_items, [](const StochasticMatrix*) {}));
    case Strategy::Base:
      return std::make_unique<BaseScorer>(train, w);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown strategy");
}

}  // namespace recwalk
