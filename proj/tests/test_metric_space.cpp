#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "treelens/gallery.hpp"
#include "treelens/metric_space.hpp"
#include "treelens/rng.hpp"

namespace tl = treelens;

namespace {

bool has_violation(const std::vector<tl::MetricViolation>& vs, const char* kind,
                   int i, int j) {
  for (const auto& v : vs)
    if (v.kind == kind && v.i == i && v.j == j) return true;
  return false;
}

}  // namespace

TEST_CASE("valid 3-point path metric passes validation") {
  auto space = tl::FiniteMetricSpace::from_rows({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  CHECK(space.n() == 3);
  CHECK(space.d(0, 2) == 2.0);
  CHECK(space.diameter() == 2.0);
}

TEST_CASE("asymmetric input is rejected with the offending pair") {
  try {
    tl::FiniteMetricSpace::from_rows({{0, 1}, {2, 0}});
    FAIL("expected MetricValidationError");
  } catch (const tl::MetricValidationError& e) {
    CHECK(has_violation(e.violations(), tl::errkind::asymmetric_input, 0, 1));
  }
}

TEST_CASE("triangle violation reports the worst triple and slack") {
  try {
    tl::FiniteMetricSpace::from_rows({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}});
    FAIL("expected MetricValidationError");
  } catch (const tl::MetricValidationError& e) {
    REQUIRE(e.violations().size() == 1);
    const auto& v = e.violations().front();
    CHECK(v.kind == tl::errkind::triangle_violation);
    CHECK(v.i == 0);
    CHECK(v.j == 2);
    CHECK(v.k == 1);
    CHECK_THAT(v.slack, Catch::Matchers::WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("negative entries, diagonal junk and non-finite cells are flagged") {
  auto neg = tl::FiniteMetricSpace::check_matrix({0, -1, -1, 0}, 2, 1e-9);
  CHECK(has_violation(neg, tl::errkind::negative_entry, 0, 1));

  auto diag = tl::FiniteMetricSpace::check_matrix({0.5, 1, 1, 0}, 2, 1e-9);
  CHECK(has_violation(diag, tl::errkind::nonzero_diagonal, 0, 0));

  const double inf = std::numeric_limits<double>::infinity();
  auto bad = tl::FiniteMetricSpace::check_matrix({0, inf, inf, 0}, 2, 1e-9);
  CHECK(has_violation(bad, tl::errkind::nonfinite_entry, 0, 1));
}

TEST_CASE("validation tolerance admits slightly slack triangles") {
  const std::vector<std::vector<double>> rows{
      {0, 1, 2.05}, {1, 0, 1}, {2.05, 1, 0}};  // exceeds the sum by 0.05
  CHECK_THROWS_AS(tl::FiniteMetricSpace::from_rows(rows),
                  tl::MetricValidationError);
  auto space = tl::FiniteMetricSpace::from_rows(rows, 0.1);
  CHECK(space.tol() == 0.1);
  CHECK(space.d(0, 2) == 2.05);
}

TEST_CASE("graph metrics: path and cycle distances") {
  auto path = tl::metric_from_graph(tl::path_graph(3));
  CHECK(path.d(0, 2) == 2.0);

  auto cyc = tl::metric_from_graph(tl::cycle_graph(4));
  CHECK(cyc.d(0, 2) == 2.0);
  CHECK(cyc.d(0, 3) == 1.0);
}

TEST_CASE("disconnected graphs are rejected naming an unreachable pair") {
  tl::GraphSpec g;
  g.vertex_count = 4;
  g.edges = {{0, 1, 1.0}, {2, 3, 1.0}};
  try {
    tl::metric_from_graph(g);
    FAIL("expected DisconnectedGraph");
  } catch (const tl::Error& e) {
    CHECK(e.kind() == tl::errkind::disconnected_graph);
    CHECK(std::string(e.what()).find("not connected") != std::string::npos);
  }
}

TEST_CASE("graph metrics agree with Floyd-Warshall and pass the axioms") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto g = tl::random_tree_graph(24, seed, 0.5, 3.0);
    // a couple of extra edges to create cycles
    tl::Rng rng(seed * 77 + 1);
    for (int e = 0; e < 4; ++e) {
      int u = static_cast<int>(rng.below(24)), v = static_cast<int>(rng.below(24));
      if (u == v) continue;
      g.edges.push_back({u, v, 1.0 + static_cast<double>(rng.below(16)) / 8.0});
    }
    auto space = tl::metric_from_graph(g);
    auto ref = oracle::floyd_warshall(g);
    for (int i = 0; i < space.n(); ++i)
      for (int j = 0; j < space.n(); ++j)
        CHECK_THAT(space.d(i, j), Catch::Matchers::WithinAbs(ref[i][j], 1e-12));
    CHECK(tl::FiniteMetricSpace::check_matrix(space.flat(), space.n(), 1e-9).empty());
  }
}

TEST_CASE("ball membership and set diameter") {
  auto path = tl::metric_from_graph(tl::path_graph(5));
  auto members = tl::ball_members(path, tl::Ball{2, 1.0});
  CHECK(members == std::vector<int>{1, 2, 3});
  CHECK(tl::set_diameter(path, members) == 2.0);

  auto tiny = tl::ball_members(path, tl::Ball{0, 0.0});
  CHECK(tiny == std::vector<int>{0});
  CHECK(tl::set_diameter(path, tiny) == 0.0);

  CHECK_THROWS_AS(tl::set_diameter(path, std::vector<int>{}), tl::Error);
}

TEST_CASE("set diameter is monotone under inclusion") {
  auto space = tl::metric_from_graph(tl::random_tree_graph(20, 5, 1.0, 2.0));
  tl::Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> big, small;
    for (int p = 0; p < space.n(); ++p)
      if (rng.below(2)) big.push_back(p);
    if (big.empty()) continue;
    for (int p : big)
      if (rng.below(2)) small.push_back(p);
    if (small.empty()) continue;
    CHECK(tl::set_diameter(space, small) <= tl::set_diameter(space, big));
  }
}

TEST_CASE("midpoint defect: paths, two points, snowflake") {
  auto path = tl::metric_from_graph(tl::path_graph(5));
  CHECK(oracle::pair_midpoint_defect(path, 0, 4) == 0.0);  // m = 2 splits exactly
  CHECK_THAT(tl::geodesicity_defect(path),
             Catch::Matchers::WithinAbs(0.5, 1e-12));  // odd-distance pairs

  auto two = tl::FiniteMetricSpace::from_rows({{0, 1}, {1, 0}});
  CHECK_THAT(tl::geodesicity_defect(two), Catch::Matchers::WithinAbs(0.5, 1e-12));

  auto snow = tl::snowflake_line(17);  // points 0..16
  const double frozen = 2.0 * std::sqrt(2.0) - 2.0;  // pair (0,16) at m = 8
  CHECK_THAT(oracle::pair_midpoint_defect(snow, 0, 16),
             Catch::Matchers::WithinAbs(frozen, 1e-12));
  CHECK(tl::geodesicity_defect(snow) >= frozen - 1e-12);
}

TEST_CASE("quantum equals the largest shortest-path edge on graph metrics") {
  tl::GraphSpec g;
  g.vertex_count = 4;  // path with weights 1, 2.5, 0.5
  g.edges = {{0, 1, 1.0}, {1, 2, 2.5}, {2, 3, 0.5}};
  auto space = tl::metric_from_graph(g);
  CHECK_THAT(space.quantum(), Catch::Matchers::WithinAbs(2.5, 1e-12));
}

TEST_CASE("rescaled spaces divide distances exactly at power-of-two scales") {
  auto space = tl::metric_from_graph(tl::random_tree_graph(12, 3, 1.0, 2.0));
  auto half = space.rescaled(2.0);
  for (int i = 0; i < space.n(); ++i)
    for (int j = 0; j < space.n(); ++j)
      CHECK(half.d(i, j) == space.d(i, j) / 2.0);
}
