#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "recwalk/dataset.hpp"
#include "recwalk/error.hpp"
#include "support/oracles.hpp"

using namespace recwalk;
using namespace recwalk::testing;

namespace {

InteractionLog parse(const std::string& text, std::size_t mu = 1, std::size_t mi = 1) {
  std::istringstream in(text);
  return parse_interactions(in, mu, mi);
}

}  // namespace

TEST_CASE("parsing detects separators and ignores ratings") {
  const auto tab = parse("u1\ti1\t5\t100\nu1\ti2\t3\t101\nu2\ti1\t1\t102\n");
  CHECK(tab.num_users() == 2);
  CHECK(tab.num_items() == 2);
  CHECK(tab.records.size() == 3);

  const auto ml = parse("1::10::5::978300760\n1::20::3::978302109\n2::10::4::978301968\n");
  CHECK(ml.num_users() == 2);
  CHECK(ml.items.name(1) == "20");

  const auto csv = parse("userId,movieId,rating,timestamp\n1,10,4.0,1\n2,10,3.5,2\n");
  CHECK(csv.num_users() == 2);
  CHECK(csv.num_items() == 1);

  const auto bare = parse("# comment\n\na,x\nb,y\r\n");
  CHECK(bare.num_users() == 2);
  CHECK(bare.items.name(1) == "y");
}

TEST_CASE("parsing errors carry the line number") {
  try {
    parse("u1\ti1\nu2\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("nodelimiter\n"), Error);
  CHECK_THROWS_AS(load_interactions("/nonexistent/ratings.dat", 1, 1), Error);
}

TEST_CASE("duplicate interactions collapse") {
  const auto log = parse("a\tx\na\tx\na\ty\n");
  CHECK(log.records.size() == 2);
  CHECK(log.to_matrix().nnz() == 2);
}

TEST_CASE("degree filtering reaches a fixed point") {
  SUBCASE("thresholds (1,1) keep a 3x3 log unchanged") {
    const auto log = parse("a\tx\nb\ty\nc\tz\na\ty\n");
    CHECK(log.num_users() == 3);
    CHECK(log.num_items() == 3);
    CHECK(log.records.size() == 4);
  }
  SUBCASE("a user below the threshold is removed and item degrees recomputed") {
    // c has one interaction; dropping c leaves item z with no users.
    const auto log = parse("a\tx\na\ty\nb\tx\nb\ty\nc\tz\n", 2, 1);
    CHECK(log.num_users() == 2);
    CHECK(log.num_items() == 2);
    CHECK(!log.items.find("z").has_value());
  }
  SUBCASE("cascading removal") {
    // min item degree 2 removes w, which leaves d with one item, below the
    // min user degree of 2.
    const auto log = parse("a\tx\na\ty\nb\tx\nb\ty\nd\ty\nd\tw\ne\tx\ne\tz\nf\tz\nf\tx\n", 2, 2);
    CHECK(!log.users.find("d").has_value());
    CHECK(log.num_items() == 3);
    const auto r = log.to_matrix();
    for (std::size_t u = 0; u < r.rows(); ++u) CHECK(r.row(u).size() >= 2);
    for (std::size_t i = 0; i < r.cols(); ++i) CHECK(r.col(i).size() >= 2);
  }
  SUBCASE("everything filtered") {
    CHECK_THROWS_AS(parse("a\tx\n", 2, 1), Error);
  }
}

TEST_CASE("leave_one_out on a two-item user") {
  // user 0 has {0, 1}; user 1 also has both so either can be held out.
  SparseMatrix r(2, 2, {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}});
  const auto s = leave_one_out(r, 42);
  REQUIRE(s.heldout[0].has_value());
  const Index h = *s.heldout[0];
  CHECK((h == 0 || h == 1));
  CHECK(s.train.at(0, h) == 0.0);
  CHECK(s.train.at(0, 1 - h) == 1.0);
  // user 1 must keep whichever column user 0 emptied
  if (s.heldout[1]) CHECK(*s.heldout[1] != h);
}

TEST_CASE("leave_one_out is deterministic") {
  std::mt19937_64 rng(9);
  const auto r = random_connected_binary(20, 30, 0.3, rng);
  const auto a = leave_one_out(r, 7, 10);
  const auto b = leave_one_out(r, 7, 10);
  CHECK(a.heldout == b.heldout);
  CHECK(a.negatives == b.negatives);
  CHECK(a.train == b.train);
  const auto c = leave_one_out(r, 8, 10);
  CHECK((c.heldout != a.heldout || c.negatives != a.negatives));
}

TEST_CASE("leave_one_out invariants against brute-force set difference") {
  std::mt19937_64 rng(21);
  const auto r = random_connected_binary(5, 6, 0.5, rng);
  const auto d = dense(r);
  const auto s = leave_one_out(r, 3, 999);
  std::size_t held = 0;
  for (std::size_t u = 0; u < 5; ++u) {
    if (!s.heldout[u]) {
      CHECK(s.negatives[u].empty());
      continue;
    }
    ++held;
    const Index h = *s.heldout[u];
    CHECK(d(Eigen::Index(u), h) == 1.0);
    CHECK(s.train.at(u, h) == 0.0);
    std::set<Index> unseen;
    for (Index i = 0; i < 6; ++i)
      if (d(Eigen::Index(u), i) == 0.0) unseen.insert(i);
    // fewer than 999 unseen items: all of them are negatives
    CHECK(std::set<Index>(s.negatives[u].begin(), s.negatives[u].end()) == unseen);
    CHECK(s.negatives[u].size() == unseen.size());
  }
  CHECK(s.train.nnz() == r.nnz() - held);
  for (std::size_t i = 0; i < 6; ++i) CHECK(s.train.col(i).size() > 0);
  for (std::size_t u = 0; u < 5; ++u) CHECK(s.train.row(u).size() > 0);
}

TEST_CASE("negatives are distinct unseen items of the requested size") {
  std::mt19937_64 rng(4);
  const auto r = random_connected_binary(30, 200, 0.05, rng);
  const auto s = leave_one_out(r, 99, 50);
  for (std::size_t u = 0; u < r.rows(); ++u) {
    if (!s.heldout[u]) continue;
    const auto& n = s.negatives[u];
    CHECK(n.size() == 50);
    CHECK(std::set<Index>(n.begin(), n.end()).size() == n.size());
    for (Index i : n) CHECK(r.at(u, i) == 0.0);
  }
}

TEST_CASE("single-interaction users keep their item; sole-user items are never held out") {
  // user 0: {0}; user 1: {0, 1}; item 1 only has user 1, so user 1 can only
  // hold out item 0, which user 0 also has.
  SparseMatrix r(2, 2, {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}});
  const auto s = leave_one_out(r, 1);
  CHECK(!s.heldout[0].has_value());
  REQUIRE(s.heldout[1].has_value());
  CHECK(*s.heldout[1] == 0);
  // a user whose items all have degree one is skipped
  SparseMatrix solo(1, 2, {{0, 0, 1}, {0, 1, 1}});
  CHECK(!leave_one_out(solo, 1).heldout[0].has_value());
}

TEST_CASE("make_validation nests inside the test split") {
  std::mt19937_64 rng(17);
  const auto r = random_connected_binary(10, 10, 0.4, rng);
  const auto test = leave_one_out(r, 5, 999);
  const auto val = make_validation(test.train, mix_seed(5, 1), 999);
  for (std::size_t u = 0; u < 10; ++u) {
    if (test.heldout[u] && val.heldout[u]) CHECK(*test.heldout[u] != *val.heldout[u]);
    if (test.train.row(u).size() < 2) CHECK(!val.heldout[u].has_value());
    CHECK(val.train.row(u).size() > 0);
  }
  for (std::size_t i = 0; i < 10; ++i) CHECK(val.train.col(i).size() > 0);
}

TEST_CASE("split files round-trip") {
  const auto log = parse("a\tx\na\ty\nb\tx\nb\tz\nc\ty\nc\tz\nc\tx\n");
  const auto r = log.to_matrix();
  const auto s = leave_one_out(r, 13, 999);
  std::ostringstream out;
  write_split(out, s, log, {"seed=13"});
  std::istringstream in(out.str());
  const auto back = read_split(in, r, log);
  CHECK(back.heldout == s.heldout);
  CHECK(back.negatives == s.negatives);
  CHECK(back.train == s.train);
  CHECK(back.seed == 13);

  std::istringstream bad("a\tq\t\n");
  CHECK_THROWS_AS(read_split(bad, r, log), Error);
}

TEST_CASE("giant component restriction") {
  const auto log = parse("a\tx\nb\tx\nb\ty\nc\tz\n");
  const auto g = restrict_to_giant_component(log);
  CHECK(g.num_users() == 2);
  CHECK(g.num_items() == 2);
  CHECK(!g.users.find("c").has_value());
}
