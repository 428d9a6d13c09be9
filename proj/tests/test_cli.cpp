#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "app.hpp"
#include "doctest.h"
#include "recwalk/dataset.hpp"
#include "support/oracles.hpp"

#include <json.hpp>

using namespace recwalk;
using namespace recwalk::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "recwalk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = app::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

/// A scratch directory holding a small clustered interaction file.
struct Sandbox {
  fs::path root;
  fs::path data;

  explicit Sandbox(const std::string& name) {
    root = fs::temp_directory_path() / ("recwalk_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    data = root / "ratings.dat";
    std::mt19937_64 rng(2024);
    const auto r = clustered_interactions(40, 30, 3, 6, rng);
    std::ofstream f(data);
    for (const auto& t : r.triplets()) f << "u" << t.row << "::m" << t.col << "::5::0\n";
  }
  ~Sandbox() { fs::remove_all(root); }

  std::vector<std::string> args(const std::string& cmd, const std::string& out,
                                std::vector<std::string> extra = {}) const {
    std::vector<std::string> a{cmd, "--data", data.string(), "--out", (root / out).string(),
                               "--neighbors", "5", "--l1", "0.5", "--l2", "1", "--alpha", "0.3"};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }
};

}  // namespace

TEST_CASE("split, train and evaluate produce the expected artifacts") {
  Sandbox box("pipeline");
  const auto s = cli(box.args("split", "a"));
  REQUIRE(s.code == 0);
  CHECK(s.out.find("users 40") != std::string::npos);
  CHECK(s.out.find("items 30") != std::string::npos);
  CHECK(fs::exists(box.root / "a/test_split.tsv"));
  CHECK(fs::exists(box.root / "a/validation_split.tsv"));
  CHECK(slurp(box.root / "a/test_split.tsv").rfind("# config=", 0) == 0);

  const auto t = cli(box.args("train", "a"));
  REQUIRE(t.code == 0);
  CHECK(t.out.find("item model fitted in") != std::string::npos);
  for (const char* f : {"item_model.txt", "item_model.bin", "recwalk.bin", "fit_stats.json"})
    CHECK(fs::exists(box.root / "a" / f));
  const auto stats = nlohmann::json::parse(slurp(box.root / "a/fit_stats.json"));
  CHECK(stats["walk"]["alpha"] == 0.3);
  CHECK(stats["item_model"]["neighbors"] == 5);

  for (const char* strat : {"kstep", "pr", "srw", "pr-base", "base", "kstep-mi", "pr-mi"}) {
    const auto e = cli(box.args("evaluate", "a", {"--strategy", strat}));
    CHECK_MESSAGE(e.code == 0, strat << ": " << e.err);
    CHECK(fs::exists(box.root / "a" / (std::string("eval_") + strat + ".csv")));
  }
}

TEST_CASE("reruns are byte-identical, whatever the thread count") {
  Sandbox box("determinism");
  for (const char* dir : {"a", "b"}) {
    const std::string threads = dir[0] == 'a' ? "1" : "3";
    REQUIRE(cli(box.args("split", dir)).code == 0);
    REQUIRE(cli(box.args("train", dir, {"--threads", threads})).code == 0);
    REQUIRE(cli(box.args("evaluate", dir, {"--threads", threads})).code == 0);
  }
  for (const char* f : {"test_split.tsv", "validation_split.tsv", "item_model.txt", "item_model.bin",
                        "recwalk.bin", "fit_stats.json", "eval_kstep.csv"}) {
    CHECK_MESSAGE(slurp(box.root / "a" / f) == slurp(box.root / "b" / f), f);
  }
}

TEST_CASE("zero-step walk scores follow the tie rule") {
  Sandbox box("kzero");
  REQUIRE(cli(box.args("split", "a")).code == 0);
  REQUIRE(cli(box.args("train", "a")).code == 0);
  const auto e = cli(box.args("evaluate", "a", {"--steps", "0"}));
  REQUIRE(e.code == 0);

  // With every item scored zero the held-out rank is one plus the number of
  // negatives with a smaller index.
  const auto log = load_interactions(box.data, 1, 1);
  std::ifstream f(box.root / "a/test_split.tsv");
  const auto split = read_split(f, log.to_matrix(), log);
  double hits = 0.0;
  for (std::size_t u = 0; u < split.num_users(); ++u) {
    if (!split.heldout[u]) continue;
    std::size_t rank = 1;
    for (Index j : split.negatives[u]) rank += j < *split.heldout[u];
    hits += rank <= 10;
  }
  std::ostringstream expect;
  expect << std::fixed << std::setprecision(2) << "HR@10      "
         << 100.0 * hits / double(split.num_evaluated()) << "%";
  CHECK(e.out.find(expect.str()) != std::string::npos);
}

TEST_CASE("invalid settings fail before any work") {
  Sandbox box("usage");
  const auto bad_alpha = cli(box.args("train", "fresh", {"--alpha", "1.2"}));
  CHECK(bad_alpha.code == 1);
  CHECK(bad_alpha.err.find("AlphaOutOfRange") != std::string::npos);
  CHECK(!fs::exists(box.root / "fresh/item_model.bin"));

  CHECK(cli({"split", "--bogus-flag"}).code == 1);
  CHECK(cli({}).code == 1);
  CHECK(cli({"evaluate", "--out", (box.root / "x").string(), "--strategy", "magic"}).code == 1);
  CHECK(cli({"--version"}).code == 0);
}

TEST_CASE("data errors exit with code 2 and a hint") {
  Sandbox box("data");
  const auto missing = cli({"split", "--data", (box.root / "nope.dat").string(), "--out",
                            (box.root / "m").string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("ParseError") != std::string::npos);

  const auto no_split = cli(box.args("train", "empty"));
  CHECK(no_split.code == 2);
  CHECK(no_split.err.find("run `split` first") != std::string::npos);

  REQUIRE(cli(box.args("split", "a")).code == 0);
  const auto empty = cli(box.args("train", "a", {"--l1", "1000"}));
  CHECK(empty.code == 2);
  CHECK(empty.err.find("EmptyModel") != std::string::npos);
  CHECK(empty.err.find("hint:") != std::string::npos);

  // two disjoint communities
  const auto split_data = box.root / "two.dat";
  {
    std::ofstream f(split_data);
    f << "a\tx\na\ty\nb\tx\nb\ty\n";
    // a larger block that stays connected after one item per user is held out
    for (const char* u : {"c", "d", "e", "f", "g"})
      for (const char* i : {"p", "q", "r", "s", "t"}) f << u << '\t' << i << '\n';
  }
  const std::vector<std::string> base{"--data", split_data.string(), "--out",
                                      (box.root / "two").string(), "--neighbors", "1",
                                      "--l1", "0.01"};
  auto with = [&](const char* cmd, std::vector<std::string> extra = {}) {
    std::vector<std::string> a{cmd};
    a.insert(a.end(), base.begin(), base.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return cli(a);
  };
  REQUIRE(with("split").code == 0);
  const auto disconnected = with("train");
  CHECK(disconnected.code == 2);
  CHECK(disconnected.err.find("--giant-component") != std::string::npos);
  REQUIRE(with("split", {"--giant-component"}).code == 0);
  CHECK(with("train", {"--giant-component"}).code == 0);
}

TEST_CASE("the installed binary reports exit codes") {
  Sandbox box("binary");
  const std::string cmd = std::string(RECWALK_CLI_PATH) + " split --data " +
                          (box.root / "missing.dat").string() + " --out " +
                          (box.root / "o").string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
}

TEST_CASE("config files are read and flags override them") {
  Sandbox box("config");
  const auto cfg = box.root / "run.cfg";
  {
    std::ofstream f(cfg);
    f << "# sweep settings\nalpha=0.2\nneighbors=\"10%\"\nl1=0.25\nsteps=2\n";
  }
  const std::vector<std::string> base{"--config", cfg.string(), "--data", box.data.string(),
                                      "--out", (box.root / "c").string()};
  auto with = [&](const char* cmd, std::vector<std::string> extra = {}) {
    std::vector<std::string> a{cmd};
    a.insert(a.end(), base.begin(), base.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return cli(a);
  };
  REQUIRE(with("split").code == 0);
  const auto t = with("train", {"--alpha", "0.4"});
  REQUIRE_MESSAGE(t.code == 0, t.err);
  const auto stats = nlohmann::json::parse(slurp(box.root / "c/fit_stats.json"));
  CHECK(stats["walk"]["alpha"] == 0.4);
  CHECK(stats["item_model"]["neighbors"] == 3);  // ceil(10% of 30)
  CHECK(stats["item_model"]["l1"] == 0.25);
}

TEST_CASE("output directory falls back to RECWALK_OUT") {
  Sandbox box("env");
  const auto dir = box.root / "from_env";
  ::setenv("RECWALK_OUT", dir.c_str(), 1);
  const auto s = cli({"split", "--data", box.data.string()});
  ::unsetenv("RECWALK_OUT");
  REQUIRE(s.code == 0);
  CHECK(fs::exists(dir / "test_split.tsv"));
}

TEST_CASE("recommend, spectrum, coverage and grid") {
  Sandbox box("reports");
  REQUIRE(cli(box.args("split", "a")).code == 0);
  REQUIRE(cli(box.args("train", "a")).code == 0);

  SUBCASE("recommend for one user excludes training items") {
    const auto r = cli(box.args("recommend", "a", {"--user", "u3", "--top", "4"}));
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("u3\t", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), ':') == 4);
    CHECK(cli(box.args("recommend", "a", {"--user", "nobody"})).code == 1);
    const auto all = cli(box.args("recommend", "a", {"--strategy", "pr"}));
    CHECK(all.code == 0);
    CHECK(fs::exists(box.root / "a/recommendations_pr.tsv"));
  }
  SUBCASE("spectrum prints coupling and structural residual") {
    const auto s = cli(box.args("spectrum", "a", {"--subdominant"}));
    REQUIRE_MESSAGE(s.code == 0, s.err);
    const auto eps = s.out.find("coupling_epsilon ");
    REQUIRE(eps != std::string::npos);
    CHECK(std::abs(std::stod(s.out.substr(eps + 17)) - 0.3) <= 1e-14);
    const auto pos = s.out.find("structural_residual ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(s.out.substr(pos + 20)) <= 1e-12);
    const auto csv = slurp(box.root / "a/spectrum.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3 + 1 + 70);
    CHECK(cli(box.args("spectrum", "a", {"--max-order", "10"})).code == 2);
  }
  SUBCASE("restart walk covers every unseen item") {
    const auto c = cli(box.args("coverage", "a", {"--strategy", "pr"}));
    REQUIRE(c.code == 0);
    CHECK(c.out.find("coverage>=50.00%  100.00%") != std::string::npos);
    CHECK(c.out.find("coverage>=90.00%  100.00%") != std::string::npos);
  }
  SUBCASE("grid over steps and alpha") {
    const auto g = cli(box.args("grid", "a",
                                {"--grid-alpha", "0.1,0.5", "--grid-steps", "1,2,3", "--grid-l1", "0.5,1"}));
    REQUIRE_MESSAGE(g.code == 0, g.err);
    CHECK(g.out.find("12 points evaluated") != std::string::npos);
    const auto csv = slurp(box.root / "a/grid_kstep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3 + 1 + 12);
  }
}
