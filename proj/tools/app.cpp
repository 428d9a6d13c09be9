#include "app.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "recwalk/dataset.hpp"
#include "recwalk/error.hpp"
#include "recwalk/item_model.hpp"
#include "recwalk/metrics.hpp"
#include "recwalk/recommender.hpp"
#include "recwalk/serialize.hpp"
#include "recwalk/spectral.hpp"
#include "recwalk/walk_model.hpp"

#ifndef RECWALK_VERSION
#define RECWALK_VERSION "0.0.0"
#endif

namespace recwalk::app {

namespace fs = std::filesystem;

const char* version() { return RECWALK_VERSION; }

std::string default_output_dir() {
  if (const char* env = std::getenv("RECWALK_OUT"); env && *env) return env;
  return "recwalk-out";
}

namespace {

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s << ',';
    if constexpr (std::is_same_v<T, double>) {
      s << format_double(v[k]);
    } else {
      s << v[k];
    }
  }
  return s.str();
}

}  // namespace

std::string RunConfig::canonical() const {
  std::vector<std::pair<std::string, std::string>> kv{
      {"alpha", format_double(alpha)},
      {"cd-max-iters", std::to_string(cd_max_iters)},
      {"cd-tol", format_double(cd_tol)},
      {"cutoff", std::to_string(cutoff)},
      {"damping", format_double(damping)},
      {"data", data},
      {"drift-steps", std::to_string(drift_steps)},
      {"drift-users", std::to_string(drift_users)},
      {"giant-component", giant_component ? "true" : "false"},
      {"grid-alpha", join(grid_alpha)},
      {"grid-damping", join(grid_damping)},
      {"grid-l1", join(grid_l1)},
      {"grid-l2", join(grid_l2)},
      {"grid-neighbors", join(grid_neighbors)},
      {"grid-steps", join(grid_steps)},
      {"l1", format_double(l1)},
      {"l2", format_double(l2)},
      {"max-order", std::to_string(max_order)},
      {"metric", metric},
      {"min-item-degree", std::to_string(min_item_degree)},
      {"min-user-degree", std::to_string(min_user_degree)},
      {"neighbors", neighbors},
      {"seed", std::to_string(seed)},
      {"split", split},
      {"steps", std::to_string(steps)},
      {"strategy", strategy},
      {"subdominant", subdominant ? "true" : "false"},
      {"thresholds", join(thresholds)},
      {"top", std::to_string(top)},
      {"user", user},
      {"walk-tol", format_double(walk_tol)},
  };
  std::string s;
  for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
  return s;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::vector<std::string> RunConfig::provenance() const {
  return {"config=" + hash(), "seed=" + std::to_string(seed), "version=" + std::string(version())};
}

namespace {

// ---------------------------------------------------------------------------
// Validation and file plumbing

bool uses_damping(Strategy s) {
  return s == Strategy::PageRank || s == Strategy::PrBaseline || s == Strategy::PrMi;
}

bool uses_steps(Strategy s) {
  return s == Strategy::KStep || s == Strategy::Srw || s == Strategy::KStepMi;
}

bool uses_alpha(Strategy s) { return s == Strategy::KStep || s == Strategy::PageRank; }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1), got " + format_double(alpha));
  }
}

void check_damping(double d) {
  if (!(d > 0.0 && d < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "damping must lie in (0, 1), got " + format_double(d));
  }
}

/// Checks everything that does not need data, so bad settings fail fast.
Strategy validate(const RunConfig& cfg) {
  check_alpha(cfg.alpha);
  const Strategy s = parse_strategy(cfg.strategy);
  if (uses_damping(s)) check_damping(cfg.damping);
  if (cfg.split != "test" && cfg.split != "validation") {
    throw Error(ErrorCode::InvalidParameter, "split must be 'test' or 'validation'");
  }
  NeighborCount::parse(cfg.neighbors);
  if (cfg.l1 < 0.0 || cfg.l2 < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "l1 and l2 must be nonnegative");
  }
  if (cfg.cutoff == 0) throw Error(ErrorCode::InvalidParameter, "cutoff must be positive");
  for (double t : cfg.thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidParameter, "thresholds lie in [0, 1]");
  }
  parse_metric(cfg.metric);
  return s;
}

fs::path out_dir(const RunConfig& cfg) {
  fs::path dir = cfg.out.empty() ? fs::path(default_output_dir()) : fs::path(cfg.out);
  fs::create_directories(dir);
  return dir;
}

template <class F>
void write_file(const fs::path& path, bool binary, F&& body) {
  std::ofstream f(path, binary ? std::ios::out | std::ios::binary | std::ios::trunc
                               : std::ios::out | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  body(f);
  f.flush();
  if (!f) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::ifstream open_input(const fs::path& path, const std::string& hint, bool binary = false) {
  std::ifstream f(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path.string() + "; " + hint);
  return f;
}

void write_comments(std::ostream& out, const RunConfig& cfg) {
  for (const auto& line : cfg.provenance()) out << "# " << line << '\n';
}

InteractionLog load_log(const RunConfig& cfg) {
  if (cfg.data.empty()) throw Error(ErrorCode::InvalidParameter, "--data is required");
  auto log = load_interactions(cfg.data, cfg.min_user_degree, cfg.min_item_degree);
  if (cfg.giant_component) log = restrict_to_giant_component(log);
  return log;
}

struct Workspace {
  InteractionLog log;
  SparseMatrix all;
  EvalSplit test;
  EvalSplit validation;

  const EvalSplit& active(const RunConfig& cfg) const {
    return cfg.split == "validation" ? validation : test;
  }
};

Workspace load_workspace(const RunConfig& cfg, const fs::path& dir) {
  Workspace ws;
  ws.log = load_log(cfg);
  ws.all = ws.log.to_matrix();
  {
    auto f = open_input(dir / "test_split.tsv", "run `split` first");
    ws.test = read_split(f, ws.all, ws.log);
  }
  {
    auto f = open_input(dir / "validation_split.tsv", "run `split` first");
    ws.validation = read_split(f, ws.test.train, ws.log);
  }
  return ws;
}

struct Models {
  ItemModel item;
  RecWalkModel walk;
};

Models load_models(const fs::path& dir) {
  Models m;
  {
    auto f = open_input(dir / "item_model.bin", "run `train` first", true);
    m.item = read_item_model_binary(f);
  }
  {
    auto f = open_input(dir / "recwalk.bin", "run `train` first", true);
    m.walk = read_walk_model(f);
  }
  return m;
}

ItemModelParams item_params(const RunConfig& cfg, const std::string& neighbors, double l1,
                            double l2) {
  ItemModelParams p;
  p.neighbors = NeighborCount::parse(neighbors);
  p.l1 = l1;
  p.l2 = l2;
  p.tol = cfg.cd_tol;
  p.max_iters = cfg.cd_max_iters;
  p.threads = cfg.threads;
  return p;
}

ScorerParams scorer_params(const RunConfig& cfg, Strategy s) {
  ScorerParams p;
  p.strategy = s;
  p.steps = cfg.steps;
  p.damping = cfg.damping;
  p.tol = cfg.walk_tol;
  return p;
}

std::string strategy_label(Strategy s, std::size_t steps, double damping) {
  std::string label = to_string(s);
  if (uses_steps(s)) label += " K=" + std::to_string(steps);
  if (uses_damping(s)) label += " damping=" + format_double(damping);
  return label;
}

// ---------------------------------------------------------------------------
// Error reporting

const char* remediation(ErrorCode code) {
  switch (code) {
    case ErrorCode::DisconnectedGraph:
      return "rerun with --giant-component to keep only the largest component";
    case ErrorCode::EmptyModel:
      return "the item model has no positive weight; lower --l1 or raise --neighbors";
    case ErrorCode::EmptyAfterFiltering:
      return "lower --min-user-degree or --min-item-degree";
    case ErrorCode::NotConverged:
      return "raise the tolerance or lower the damping";
    case ErrorCode::TooLarge:
      return "raise --max-order if the dense eigensolver can afford it";
    case ErrorCode::IndexMapMismatch:
      return "the model and split come from different runs; rerun `train`";
    default:
      return nullptr;
  }
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return 1;
    case ErrorKind::Data: return 2;
    case ErrorKind::Numerical: return 3;
  }
  return 2;
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands

int cmd_split(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const auto dir = out_dir(cfg);
  const auto log = load_log(cfg);
  const auto r = log.to_matrix();
  const auto test = leave_one_out(r, cfg.seed);
  const auto validation = make_validation(test.train, mix_seed(cfg.seed, 1));
  write_file(dir / "test_split.tsv", false,
             [&](std::ostream& f) { write_split(f, test, log, cfg.provenance()); });
  write_file(dir / "validation_split.tsv", false,
             [&](std::ostream& f) { write_split(f, validation, log, cfg.provenance()); });
  out << "users " << log.num_users() << "\nitems " << log.num_items() << "\ninteractions "
      << r.nnz() << "\ntest users " << test.num_evaluated() << "\nvalidation users "
      << validation.num_evaluated() << '\n';
  return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const auto dir = out_dir(cfg);
  const auto ws = load_workspace(cfg, dir);
  const auto& train = ws.active(cfg).train;

  const auto start = std::chrono::steady_clock::now();
  const auto item = build_item_model(train, item_params(cfg, cfg.neighbors, cfg.l1, cfg.l2));
  const auto fitted = std::chrono::steady_clock::now();
  const auto walk = build_p(train, item.w, cfg.alpha);
  const auto done = std::chrono::steady_clock::now();

  write_file(dir / "item_model.txt", false, [&](std::ostream& f) {
    write_comments(f, cfg);
    write_item_model_text(f, item);
  });
  write_file(dir / "item_model.bin", true, [&](std::ostream& f) { write_item_model_binary(f, item); });
  write_file(dir / "recwalk.bin", true, [&](std::ostream& f) { write_walk_model(f, walk); });

  std::size_t sweeps = 0, max_sweeps = 0;
  double objective = 0.0;
  for (const auto& s : item.stats) {
    sweeps += s.iterations;
    max_sweeps = std::max(max_sweeps, s.iterations);
    objective += s.objective;
  }
  nlohmann::ordered_json stats;
  stats["provenance"] = {{"config", cfg.hash()}, {"seed", cfg.seed}, {"version", version()}};
  stats["split"] = cfg.split;
  stats["users"] = train.rows();
  stats["items"] = train.cols();
  stats["train_interactions"] = train.nnz();
  stats["item_model"] = {{"neighbors", item.neighbors},
                         {"l1", item.l1},
                         {"l2", item.l2},
                         {"nonzeros", item.w.nnz()},
                         {"unconverged_columns", item.unconverged()},
                         {"total_sweeps", sweeps},
                         {"max_sweeps", max_sweeps},
                         {"objective_sum", objective}};
  stats["walk"] = {{"alpha", walk.alpha}, {"order", walk.order()}, {"nonzeros", walk.p.matrix().nnz()}};
  write_file(dir / "fit_stats.json", false, [&](std::ostream& f) { f << stats.dump(2) << '\n'; });

  const auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
  out << std::fixed << std::setprecision(3) << "item model fitted in " << secs(start, fitted)
      << " s (" << item.w.nnz() << " weights, C = " << item.neighbors << ")\n"
      << "walk matrix built in " << secs(fitted, done) << " s\n";
  if (item.unconverged() > 0) {
    out << "warning: " << item.unconverged() << " columns hit the sweep limit\n";
  }
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const Strategy s = validate(cfg);
  const auto dir = out_dir(cfg);
  const auto ws = load_workspace(cfg, dir);
  const auto& split = ws.active(cfg);
  const auto models = load_models(dir);
  const auto scorer = make_scorer(scorer_params(cfg, s), models.walk, split.train, models.item.w);
  const auto report = evaluate(*scorer, split, cfg.cutoff, cfg.threads);
  const auto label = strategy_label(s, cfg.steps, cfg.damping);
  const std::string stem = "eval_" + std::string(to_string(s));
  write_file(dir / (stem + ".csv"), false, [&](std::ostream& f) {
    write_comments(f, cfg);
    write_report_csv(f, report, to_string(s));
  });
  write_file(dir / (stem + ".txt"), false, [&](std::ostream& f) {
    write_comments(f, cfg);
    write_report_table(f, report, label);
  });
  write_report_table(out, report, label);
  return 0;
}

int cmd_recommend(const RunConfig& cfg, std::ostream& out) {
  const Strategy s = validate(cfg);
  const auto dir = out_dir(cfg);
  const auto ws = load_workspace(cfg, dir);
  const auto& train = ws.active(cfg).train;
  const auto models = load_models(dir);
  const auto scorer = make_scorer(scorer_params(cfg, s), models.walk, train, models.item.w);

  std::vector<std::size_t> users;
  if (!cfg.user.empty()) {
    const auto u = ws.log.users.find(cfg.user);
    if (!u) throw Error(ErrorCode::InvalidParameter, "unknown user '" + cfg.user + "'");
    users.push_back(*u);
  } else {
    users.resize(train.rows());
    for (std::size_t u = 0; u < users.size(); ++u) users[u] = u;
  }

  std::vector<std::string> lines(users.size());
  const auto n = static_cast<std::ptrdiff_t>(users.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8) num_threads(cfg.threads > 0 ? cfg.threads : omp_get_max_threads())
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      const std::size_t u = users[std::size_t(k)];
      const auto scores = scorer->score(u);
      const auto best = top_n(scores, cfg.top, train.row(u).indices);
      std::string line = ws.log.users.name(Index(u)) + "\t";
      for (std::size_t j = 0; j < best.size(); ++j) {
        if (j) line += ',';
        line += ws.log.items.name(best[j].first) + ":" + format_double(best[j].second);
      }
      lines[std::size_t(k)] = std::move(line);
    } catch (...) {
#pragma omp critical(recwalk_recommend_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  write_file(dir / ("recommendations_" + std::string(to_string(s)) + ".tsv"), false,
             [&](std::ostream& f) {
               write_comments(f, cfg);
               for (const auto& line : lines) f << line << '\n';
             });
  if (users.size() == 1) out << lines[0] << '\n';
  else out << "wrote recommendations for " << users.size() << " users\n";
  return 0;
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const auto dir = out_dir(cfg);
  RecWalkModel model;
  {
    auto f = open_input(dir / "recwalk.bin", "run `train` first", true);
    model = read_walk_model(f);
  }
  const double residual = structural_eigenpair_residual(model);
  const auto coupling =
      coupling_degree(model.p, Partition::canonical(model.num_users, model.num_items));
  out << std::setprecision(17) << "alpha " << model.alpha << "\nstructural_residual " << residual
      << "\ncoupling_epsilon " << coupling.epsilon << '\n';

  const auto spectrum = dense_spectrum(model.p, cfg.max_order);
  write_file(dir / "spectrum.csv", false, [&](std::ostream& f) {
    write_comments(f, cfg);
    f << "re,im,modulus\n";
    for (const auto& z : spectrum.eigenvalues) {
      f << format_double(z.real()) << ',' << format_double(z.imag()) << ','
        << format_double(std::abs(z)) << '\n';
    }
  });
  out << "eigenvalues_within_3alpha_of_one " << spectrum.count_near_one(3.0 * model.alpha) << '\n';

  std::vector<std::size_t> users(std::min(cfg.drift_users, model.num_users));
  for (std::size_t u = 0; u < users.size(); ++u) users[u] = u;
  const auto drift = landing_drift(model, users, cfg.drift_steps);
  write_file(dir / "drift.csv", false, [&](std::ostream& f) {
    write_comments(f, cfg);
    f << "k,pairwise,to_stationary\n";
    for (const auto& d : drift) {
      f << d.step << ',' << format_double(d.pairwise) << ',' << format_double(d.to_stationary) << '\n';
    }
  });
  if (cfg.subdominant) {
    SubdominantOptions opts;
    opts.seed = cfg.seed;
    out << "subdominant_modulus " << subdominant_modulus(model.p, opts) << '\n';
  }
  return 0;
}

int cmd_coverage(const RunConfig& cfg, std::ostream& out) {
  const Strategy s = validate(cfg);
  const auto dir = out_dir(cfg);
  const auto ws = load_workspace(cfg, dir);
  const auto& train = ws.active(cfg).train;
  const auto models = load_models(dir);
  const auto scorer = make_scorer(scorer_params(cfg, s), models.walk, train, models.item.w);
  const auto report = coverage_audit(*scorer, train, cfg.thresholds, cfg.threads);
  write_file(dir / ("coverage_" + std::string(to_string(s)) + ".csv"), false, [&](std::ostream& f) {
    write_comments(f, cfg);
    f << "threshold,users_fraction\n";
    for (std::size_t k = 0; k < report.thresholds.size(); ++k) {
      f << format_double(report.thresholds[k]) << ',' << format_double(report.fractions[k]) << '\n';
    }
  });
  out << std::fixed << std::setprecision(2);
  for (std::size_t k = 0; k < report.thresholds.size(); ++k) {
    out << "coverage>=" << 100.0 * report.thresholds[k] << "%  " << 100.0 * report.fractions[k]
        << "% of " << report.num_users << " users\n";
  }
  return 0;
}

int cmd_grid(const RunConfig& cfg, std::ostream& out) {
  const Strategy s = validate(cfg);
  const auto dir = out_dir(cfg);
  const auto ws = load_workspace(cfg, dir);
  const auto& split = ws.validation;

  const auto neighbors = cfg.grid_neighbors.empty() ? std::vector<std::string>{cfg.neighbors}
                                                    : cfg.grid_neighbors;
  const auto l1s = cfg.grid_l1.empty() ? std::vector<double>{cfg.l1} : cfg.grid_l1;
  const auto l2s = cfg.grid_l2.empty() ? std::vector<double>{cfg.l2} : cfg.grid_l2;
  auto alphas = cfg.grid_alpha.empty() || !uses_alpha(s) ? std::vector<double>{cfg.alpha}
                                                         : cfg.grid_alpha;
  auto steps = cfg.grid_steps.empty() || !uses_steps(s) ? std::vector<std::size_t>{cfg.steps}
                                                        : cfg.grid_steps;
  auto dampings = cfg.grid_damping.empty() || !uses_damping(s) ? std::vector<double>{cfg.damping}
                                                               : cfg.grid_damping;
  for (double a : alphas) check_alpha(a);
  if (uses_damping(s)) for (double d : dampings) check_damping(d);
  for (const auto& c : neighbors) NeighborCount::parse(c);

  const std::size_t n_models = neighbors.size() * l1s.size() * l2s.size();
  const std::size_t n_walk = alphas.size() * steps.size() * dampings.size();

  struct Point {
    std::size_t c, l1, l2, alpha, steps, damping;
  };
  auto decode = [&](std::size_t k) {
    Point p{};
    p.damping = k % dampings.size();
    k /= dampings.size();
    p.steps = k % steps.size();
    k /= steps.size();
    p.alpha = k % alphas.size();
    k /= alphas.size();
    p.l2 = k % l2s.size();
    k /= l2s.size();
    p.l1 = k % l1s.size();
    k /= l1s.size();
    p.c = k;
    return p;
  };
  auto label = [&](std::size_t k) {
    const auto p = decode(k);
    std::string l = "C=" + neighbors[p.c] + " l1=" + format_double(l1s[p.l1]) +
                    " l2=" + format_double(l2s[p.l2]);
    if (uses_alpha(s)) l += " alpha=" + format_double(alphas[p.alpha]);
    if (uses_steps(s)) l += " K=" + std::to_string(steps[p.steps]);
    if (uses_damping(s)) l += " damping=" + format_double(dampings[p.damping]);
    return l;
  };

  // Points are visited in order, so one cached item model and walk matrix
  // cover every consecutive run that shares them.
  std::optional<std::size_t> item_key, walk_key;
  ItemModel item;
  RecWalkModel walk;
  auto evaluate_point = [&](std::size_t k) {
    const auto p = decode(k);
    const std::size_t ik = (p.c * l1s.size() + p.l1) * l2s.size() + p.l2;
    const std::size_t wk = ik * alphas.size() + p.alpha;
    if (item_key != ik) {
      walk_key.reset();
      item_key.reset();
      item = build_item_model(split.train, item_params(cfg, neighbors[p.c], l1s[p.l1], l2s[p.l2]));
      item_key = ik;
    }
    if (walk_key != wk) {
      walk = build_p(split.train, item.w, alphas[p.alpha]);
      walk_key = wk;
    }
    ScorerParams sp = scorer_params(cfg, s);
    sp.steps = steps[p.steps];
    sp.damping = dampings[p.damping];
    const auto scorer = make_scorer(sp, walk, split.train, item.w);
    return evaluate(*scorer, split, cfg.cutoff, cfg.threads);
  };

  const Metric metric = parse_metric(cfg.metric);
  const auto result = grid_search(n_models * n_walk, label, evaluate_point, metric, 1);
  write_file(dir / ("grid_" + std::string(to_string(s)) + ".csv"), false, [&](std::ostream& f) {
    write_comments(f, cfg);
    write_grid_csv(f, result);
  });
  std::size_t failed = 0;
  for (const auto& e : result.entries) failed += e.report ? 0 : 1;
  out << result.entries.size() << " points evaluated on the validation split, " << failed
      << " failed\n";
  if (!result.best) throw Error(ErrorCode::NotConverged, "every grid point failed");
  const auto& best = result.entries[*result.best];
  out << "best " << best.label << '\n';
  write_report_table(out, *best.report, to_string(s));
  return 0;
}

// ---------------------------------------------------------------------------
// Argument parsing

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.out = default_output_dir();

  CLI::App app{"Top-n recommendation by random walks over a user-item graph and a sparse item model",
               "recwalk"};
  app.set_version_flag("--version", version());
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  app.add_option("--data", cfg.data, "interaction file (user item [rating [timestamp]])");
  app.add_option("--min-user-degree", cfg.min_user_degree)->capture_default_str();
  app.add_option("--min-item-degree", cfg.min_item_degree)->capture_default_str();
  app.add_flag("--giant-component", cfg.giant_component,
               "keep only the largest connected component of the user-item graph");
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--split", cfg.split, "split to train and evaluate on")
      ->check(CLI::IsMember({"test", "validation"}))
      ->capture_default_str();

  app.add_option("--neighbors", cfg.neighbors, "neighborhood size C, a count or a percentage like 2.5%")
      ->capture_default_str();
  app.add_option("--l1", cfg.l1, "1-norm penalty")->capture_default_str();
  app.add_option("--l2", cfg.l2, "2-norm penalty")->capture_default_str();
  app.add_option("--cd-tol", cfg.cd_tol, "coordinate descent tolerance")->capture_default_str();
  app.add_option("--cd-max-iters", cfg.cd_max_iters, "coordinate descent sweep limit")
      ->capture_default_str();

  app.add_option("--alpha", cfg.alpha, "probability of a user-item step")->capture_default_str();
  app.add_option("--strategy", cfg.strategy, "kstep, pr, srw, pr-base, base, kstep-mi or pr-mi")
      ->capture_default_str();
  app.add_option("--steps", cfg.steps, "walk length K")->capture_default_str();
  app.add_option("--damping", cfg.damping, "restart walk damping")->capture_default_str();
  app.add_option("--walk-tol", cfg.walk_tol, "restart walk tolerance (1-norm)")->capture_default_str();

  app.add_option("--cutoff", cfg.cutoff, "list length n for HR, ARHR and NDCG")->capture_default_str();
  app.add_option("--user", cfg.user, "recommend for this user id only");
  app.add_option("--top", cfg.top, "recommendations per user")->capture_default_str();
  app.add_option("--thresholds", cfg.thresholds, "coverage thresholds")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--max-order", cfg.max_order, "largest matrix for the dense eigensolver")
      ->capture_default_str();
  app.add_option("--drift-steps", cfg.drift_steps)->capture_default_str();
  app.add_option("--drift-users", cfg.drift_users)->capture_default_str();
  app.add_flag("--subdominant", cfg.subdominant, "also estimate the subdominant eigenvalue modulus");

  app.add_option("--grid-neighbors", cfg.grid_neighbors)->delimiter(',');
  app.add_option("--grid-l1", cfg.grid_l1)->delimiter(',');
  app.add_option("--grid-l2", cfg.grid_l2)->delimiter(',');
  app.add_option("--grid-alpha", cfg.grid_alpha)->delimiter(',');
  app.add_option("--grid-steps", cfg.grid_steps)->delimiter(',');
  app.add_option("--grid-damping", cfg.grid_damping)->delimiter(',');
  app.add_option("--metric", cfg.metric, "grid objective: hr, arhr or ndcg")->capture_default_str();

  app.add_option("--out", cfg.out, "output directory (default from RECWALK_OUT)")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads, 0 for all hardware threads")
      ->capture_default_str();

  using Command = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands{
      {"split", "write the test and validation splits", cmd_split},
      {"train", "fit the item model and build the walk matrix", cmd_train},
      {"evaluate", "rank held-out items and report HR, ARHR and NDCG", cmd_evaluate},
      {"recommend", "write top-n lists", cmd_recommend},
      {"spectrum", "eigenvalues, coupling and mixing diagnostics of the walk", cmd_spectrum},
      {"coverage", "share of unseen items each user can be recommended", cmd_coverage},
      {"grid", "hyperparameter search on the validation split", cmd_grid},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    for (const auto& [cmd, help, fn] : commands) {
      if (name == cmd) return fn(cfg, out);
    }
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (const char* hint = remediation(e.code())) err << "hint: " << hint << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace recwalk::app
