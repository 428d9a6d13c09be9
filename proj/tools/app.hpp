#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace recwalk::app {

/// Every setting a command can use. Field names match the long flag names
/// and the keys of a `--config` file.
struct RunConfig {
  // data
  std::string data;
  std::size_t min_user_degree = 1;
  std::size_t min_item_degree = 1;
  bool giant_component = false;
  std::uint64_t seed = 1;
  std::string split = "test";  // "test" or "validation"

  // item model
  std::string neighbors = "50";
  double l1 = 1.0;
  double l2 = 1.0;
  double cd_tol = 1e-6;
  std::size_t cd_max_iters = 1000;

  // walk
  double alpha = 0.005;
  std::string strategy = "kstep";
  std::size_t steps = 5;
  double damping = 0.5;
  double walk_tol = 1e-8;

  // evaluation and reports
  std::size_t cutoff = 10;
  std::string user;
  std::size_t top = 10;
  std::vector<double> thresholds{0.5, 0.9};
  std::size_t max_order = 5000;
  std::size_t drift_steps = 50;
  std::size_t drift_users = 10;
  bool subdominant = false;

  // grid
  std::vector<std::string> grid_neighbors;
  std::vector<double> grid_l1;
  std::vector<double> grid_l2;
  std::vector<double> grid_alpha;
  std::vector<std::size_t> grid_steps;
  std::vector<double> grid_damping;
  std::string metric = "ndcg";

  // execution; not part of the configuration hash
  std::string out;
  int threads = 0;

  /// Sorted key=value listing of every field that can change an output.
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical(), as 16 hex digits.
  std::string hash() const;
  /// Lines written at the top of every text artifact.
  std::vector<std::string> provenance() const;
};

const char* version();

/// Default output directory; RECWALK_OUT overrides it.
std::string default_output_dir();

int cmd_split(const RunConfig& cfg, std::ostream& out);
int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_evaluate(const RunConfig& cfg, std::ostream& out);
int cmd_recommend(const RunConfig& cfg, std::ostream& out);
int cmd_spectrum(const RunConfig& cfg, std::ostream& out);
int cmd_coverage(const RunConfig& cfg, std::ostream& out);
int cmd_grid(const RunConfig& cfg, std::ostream& out);

/// Parses arguments, runs one subcommand and maps failures to exit codes:
/// 0 success, 1 usage or configuration, 2 data, 3 numerical.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace recwalk::app
