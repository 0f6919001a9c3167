#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "support/oracles.hpp"
#include "treelens/gallery.hpp"
#include "treelens/hyperbolicity.hpp"

namespace tl = treelens;

namespace {

tl::FiniteMetricSpace weighted_star() {
  tl::GraphSpec g;  // center 0, leaves at distances 1, 2, 3
  g.vertex_count = 4;
  g.edges = {{0, 1, 1.0}, {0, 2, 2.0}, {0, 3, 3.0}};
  return tl::metric_from_graph(g);
}

tl::FiniteMetricSpace relabeled(const tl::FiniteMetricSpace& s,
                                const std::vector<int>& perm) {
  std::vector<std::vector<double>> rows(s.n(), std::vector<double>(s.n()));
  for (int i = 0; i < s.n(); ++i)
    for (int j = 0; j < s.n(); ++j) rows[i][j] = s.d(perm[i], perm[j]);
  return tl::FiniteMetricSpace::from_rows(rows);
}

}  // namespace

TEST_CASE("tripod lengths: equilateral, degenerate, weighted star") {
  auto eq = tl::FiniteMetricSpace::from_rows({{0, 2, 2}, {2, 0, 2}, {2, 2, 0}});
  auto a = tl::tripod_lengths(eq, 0, 1, 2);
  CHECK(a == std::array<double, 3>{1, 1, 1});

  auto path = tl::metric_from_graph(tl::path_graph(4));
  auto deg = tl::tripod_lengths(path, 0, 3, 3);  // x2 = x3 at distance 3
  CHECK(deg == std::array<double, 3>{3, 0, 0});

  auto star = weighted_star();
  auto st = tl::tripod_lengths(star, 1, 2, 3);
  CHECK(st == std::array<double, 3>{1, 2, 3});
}

TEST_CASE("tripod sums reproduce pairwise distances on random spaces") {
  for (auto& space :
       {tl::metric_from_graph(tl::random_tree_graph(30, 21, 0.5, 3.0)),
        tl::metric_from_graph(tl::grid_graph(4, 5)), tl::snowflake_line(12)}) {
    for (int x = 0; x < space.n(); x += 2)
      for (int y = 0; y < space.n(); y += 3)
        for (int z = 0; z < space.n(); z += 5) {
          auto a = tl::tripod_lengths(space, x, y, z);
          CHECK_THAT(a[0] + a[1],
                     Catch::Matchers::WithinAbs(space.d(x, y), 2e-9));
          CHECK_THAT(a[1] + a[2],
                     Catch::Matchers::WithinAbs(space.d(y, z), 2e-9));
          CHECK_THAT(a[0] + a[2],
                     Catch::Matchers::WithinAbs(space.d(x, z), 2e-9));
        }
  }
}

TEST_CASE("tree triangles are exactly 0-thin") {
  auto tree = tl::metric_from_graph(tl::random_tree_graph(25, 8, 0.5, 2.5));
  for (int x = 0; x < tree.n(); x += 2)
    for (int y = x + 1; y < tree.n(); y += 3)
      for (int z = y + 1; z < tree.n(); z += 4)
        CHECK(tl::triangle_thinness(tree, x, y, z).thinness == 0.0);
}

TEST_CASE("6-cycle triangle {0,2,4} measures delta = 2") {
  auto g = tl::cycle_graph(6);
  auto space = tl::metric_from_graph(g);
  auto an = tl::triangle_thinness(space, 0, 2, 4);
  CHECK(an.tripod == std::array<double, 3>{1, 1, 1});
  // frozen from the brute-force path enumeration oracle
  const auto d = oracle::floyd_warshall(g);
  const double ref = oracle::triangle_thinness_brute(
      d, oracle::parameterize(d, {0, 1, 2}), oracle::parameterize(d, {2, 3, 4}),
      oracle::parameterize(d, {0, 5, 4}));
  CHECK(ref == 2.0);
  CHECK(an.thinness == 2.0);
}

TEST_CASE("degenerate triangles are 0-thin") {
  auto space = tl::metric_from_graph(tl::cycle_graph(6));
  CHECK(tl::triangle_thinness(space, 3, 3, 5).thinness == 0.0);
}

TEST_CASE("enumeration caps flag a partial result") {
  // the pair (0, 3) is antipodal on the 6-cycle and has two geodesics
  auto space = tl::metric_from_graph(tl::cycle_graph(6));
  auto an = tl::triangle_thinness(space, 0, 2, 3, {tl::GeodesicMode::exhaustive, 1});
  CHECK(an.enumeration_truncated);

  auto full = tl::triangle_thinness(space, 0, 2, 3, {tl::GeodesicMode::exhaustive, 64});
  CHECK_FALSE(full.enumeration_truncated);
  CHECK(full.thinness >= an.thinness);  // more edge choices, larger max
}

TEST_CASE("a broken metric surfaces as a negative tripod") {
  // trusted() skips validation; the triangle violation shows up downstream
  auto bad = tl::FiniteMetricSpace::trusted({0, 1, 3, 1, 0, 1, 3, 1, 0}, 3);
  CHECK_THROWS_AS(tl::tripod_lengths(bad, 0, 1, 2), tl::Error);
}

TEST_CASE("space thinness: trees exact zero, 6-cycle brute-forced") {
  auto tree = tl::metric_from_graph(tl::random_tree_graph(50, 13, 0.5, 3.0));
  auto rep = tl::space_thinness(tree, 1u << 30, 0);
  CHECK(rep.exhaustive);
  CHECK(rep.delta == 0.0);

  auto g = tl::cycle_graph(6);
  auto cyc = tl::metric_from_graph(g);
  auto crep = tl::space_thinness(cyc, 1u << 20, 0,
                                 {tl::GeodesicMode::exhaustive, 64});
  CHECK(crep.exhaustive);
  CHECK(crep.triangles_scanned == 20);
  CHECK(crep.delta == oracle::space_thinness_brute(g));
  CHECK(crep.delta == 2.0);
}

TEST_CASE("a budget of exactly C(n,3) is still exhaustive") {
  auto space = tl::metric_from_graph(tl::grid_graph(3, 3));  // C(9,3) = 84
  auto exact = tl::space_thinness(space, 84, 0);
  CHECK(exact.exhaustive);
  CHECK(exact.triangles_scanned == 84);
  CHECK(exact.delta == tl::space_thinness(space, 1u << 30, 5).delta);
}

TEST_CASE("budgeted thinness is deterministic and bounded by the exact value") {
  auto space = tl::metric_from_graph(tl::grid_graph(4, 4));
  auto exact = tl::space_thinness(space, 1u << 30, 0);
  auto s1 = tl::space_thinness(space, 25, 7);
  auto s2 = tl::space_thinness(space, 25, 7);
  CHECK(s1.delta == s2.delta);
  CHECK(s1.worst.vertices == s2.worst.vertices);
  CHECK_FALSE(s1.exhaustive);
  CHECK(s1.delta <= exact.delta);

  auto one = tl::space_thinness(space, 1, 123);
  CHECK(one.triangles_scanned == 1);
}

TEST_CASE("four-point delta: trees, 4-cycle, tiny spaces") {
  auto tree = tl::metric_from_graph(tl::random_tree_graph(40, 17, 0.5, 3.0));
  CHECK(tl::four_point_delta(tree, 1u << 30, 0).delta == 0.0);

  auto cyc = tl::metric_from_graph(tl::cycle_graph(4));
  auto rep = tl::four_point_delta(cyc, 1u << 20, 0);
  CHECK(rep.delta == 1.0);
  CHECK(rep.worst == std::array<int, 4>{0, 1, 2, 3});
  CHECK(rep.delta == oracle::four_point_brute(cyc));

  auto point = tl::FiniteMetricSpace::from_rows({{0}});
  CHECK(tl::four_point_delta(point, 10, 0).delta == 0.0);
}

TEST_CASE("sampled four-point stays below the exhaustive value") {
  auto space = tl::metric_from_graph(tl::grid_graph(4, 4));
  auto exact = tl::four_point_delta(space, 1u << 30, 0);
  auto sampled = tl::four_point_delta(space, 40, 3);
  CHECK_FALSE(sampled.exhaustive);
  CHECK(sampled.delta <= exact.delta);
}

TEST_CASE("tree certification: star, 4-cycle, single edge") {
  CHECK(tl::certify_tree(tl::metric_from_graph(tl::star_graph(7))).is_tree);

  auto cyc = tl::certify_tree(tl::metric_from_graph(tl::cycle_graph(4)));
  CHECK_FALSE(cyc.is_tree);
  CHECK(cyc.delta4 == 1.0);
  CHECK(cyc.worst == std::array<int, 4>{0, 1, 2, 3});

  CHECK(tl::certify_tree(tl::metric_from_graph(tl::path_graph(2))).is_tree);
}

TEST_CASE("weighted trees certify as trees") {
  for (std::uint64_t seed : {1ULL, 5ULL, 9ULL})
    CHECK(tl::certify_tree(
              tl::metric_from_graph(tl::random_tree_graph(35, seed, 0.5, 3.0)))
              .is_tree);
}

TEST_CASE("relabeling leaves both deltas unchanged") {
  auto space = tl::metric_from_graph(tl::grid_graph(3, 4));
  std::vector<int> perm(space.n());
  std::iota(perm.begin(), perm.end(), 0);
  tl::Rng rng(31);
  for (int i = space.n() - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  auto shuffled = relabeled(space, perm);

  CHECK(tl::space_thinness(space, 1u << 30, 0).delta ==
        tl::space_thinness(shuffled, 1u << 30, 0).delta);
  CHECK(tl::four_point_delta(space, 1u << 30, 0).delta ==
        tl::four_point_delta(shuffled, 1u << 30, 0).delta);
}

TEST_CASE("thread counts do not change the measurements") {
  auto space = tl::metric_from_graph(tl::grid_graph(4, 4));
  auto a = tl::space_thinness(space, 1u << 30, 0, {}, 1);
  auto b = tl::space_thinness(space, 1u << 30, 0, {}, 8);
  CHECK(a.delta == b.delta);
  CHECK(a.worst.vertices == b.worst.vertices);
  auto fa = tl::four_point_delta(space, 1u << 30, 0, 1);
  auto fb = tl::four_point_delta(space, 1u << 30, 0, 8);
  CHECK(fa.delta == fb.delta);
  CHECK(fa.worst == fb.worst);
}
