#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/loops.hpp"
#include "support/oracles.hpp"
#include "treelens/gallery.hpp"
#include "treelens/lipschitz.hpp"
#include "treelens/rng.hpp"

namespace tl = treelens;
using testsupport::euler_tour_loop;
using testsupport::random_field;

TEST_CASE("bump and distance fields satisfy their declared constants") {
  auto space = tl::metric_from_graph(tl::random_tree_graph(25, 5, 0.5, 2.0));
  const std::vector<int> support{0, 3};
  auto bump = tl::bump_field(space, support, 2.0);
  CHECK(bump.lip == 0.5);
  tl::validate_field(space, bump);
  CHECK(bump.values[0] == 1.0);
  CHECK(bump.values[3] == 1.0);

  auto dist = tl::distance_field(space, 4);
  CHECK(dist.lip == 1.0);
  tl::validate_field(space, dist);
  CHECK(dist.values[4] == 0.0);

  auto path = tl::metric_from_graph(tl::path_graph(5));
  auto ramp = tl::bump_field(path, std::vector<int>{0}, 2.0);
  CHECK(ramp.values[1] == 0.5);   // linear ramp
  CHECK(ramp.values[2] == 0.0);   // beyond eps
  CHECK(ramp.values[4] == 0.0);
}

TEST_CASE("field validation rejects a steep field") {
  auto path = tl::metric_from_graph(tl::path_graph(3));
  tl::ScalarField f;
  f.values = {0.0, 5.0, 0.0};
  f.lip = 1.0;
  CHECK_THROWS_AS(tl::validate_field(path, f), tl::Error);
}

TEST_CASE("retraced loops integrate to exactly zero") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto g = tl::random_tree_graph(20, seed, 0.5, 2.0);
    auto space = tl::metric_from_graph(g);
    auto loop = euler_tour_loop(g, 0);
    loop.validate(space);
    auto f = random_field(space, seed * 3 + 1);
    auto pi = random_field(space, seed * 3 + 2);
    CHECK(tl::loop_integral(space, loop, f, pi).value == 0.0);
  }
}

TEST_CASE("documented 4-cycle loop integrates to exactly one") {
  auto space = tl::metric_from_graph(tl::cycle_graph(4));
  tl::SampledLoop loop;
  loop.points = {0, 1, 2, 3, 0};
  loop.times = {0.0, 0.25, 0.5, 0.75, 1.0};
  auto pi = tl::distance_field(space, 0);                     // (0,1,2,1)
  auto f = tl::bump_field(space, std::vector<int>{1}, 1.0);   // (0,1,0,0)
  REQUIRE(pi.values == std::vector<double>{0, 1, 2, 1});
  REQUIRE(f.values == std::vector<double>{0, 1, 0, 0});
  // hand trapezoid: 0.5*(0+1)*1 + 0.5*(1+0)*1 + 0 + 0
  CHECK(tl::loop_integral(space, loop, f, pi).value == 1.0);
}

TEST_CASE("constant integrand telescopes to zero") {
  auto space = tl::metric_from_graph(tl::cycle_graph(5));
  tl::SampledLoop loop;
  loop.points = {0, 2, 4, 1, 3, 0};
  loop.times = {0, 1, 2, 3, 4, 5};
  tl::ScalarField c;
  c.values.assign(space.n(), 3.25);
  c.lip = 0.0;
  auto pi = tl::distance_field(space, 0);
  CHECK(tl::loop_integral(space, loop, c, pi).value == 0.0);
}

TEST_CASE("reversal negates the integral exactly") {
  auto space = tl::metric_from_graph(tl::grid_graph(3, 3));
  tl::SampledLoop loop;
  loop.points = {0, 1, 4, 7, 6, 3, 0};
  loop.times = {0, 1, 2, 3, 4, 5, 6};
  auto f = random_field(space, 11);
  auto pi = random_field(space, 12);
  const double fwd = tl::loop_integral(space, loop, f, pi).value;
  const double bwd = tl::loop_integral(space, loop.reversed(), f, pi).value;
  CHECK(fwd == -bwd);
  CHECK(fwd != 0.0);  // the cycle is not retraced
  // grouped sum agrees with the plain sequential trapezoid
  CHECK_THAT(fwd,
             Catch::Matchers::WithinAbs(
                 oracle::loop_integral_naive(loop.points, f.values, pi.values),
                 1e-12));
}

TEST_CASE("concatenation at a shared basepoint is additive") {
  auto space = tl::metric_from_graph(tl::grid_graph(3, 3));
  tl::SampledLoop a, b, joined;
  a.points = {0, 1, 4, 3, 0};
  a.times = {0, 1, 2, 3, 4};
  b.points = {0, 3, 6, 7, 4, 1, 0};
  b.times = {0, 1, 2, 3, 4, 5, 6};
  joined.points = {0, 1, 4, 3, 0, 3, 6, 7, 4, 1, 0};
  joined.times = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  auto f = random_field(space, 21);
  auto pi = random_field(space, 22);
  const double va = tl::loop_integral(space, a, f, pi).value;
  const double vb = tl::loop_integral(space, b, f, pi).value;
  const double vj = tl::loop_integral(space, joined, f, pi).value;
  CHECK_THAT(vj, Catch::Matchers::WithinAbs(va + vb, 1e-12));
}

TEST_CASE("open walks are rejected") {
  auto space = tl::metric_from_graph(tl::path_graph(4));
  tl::SampledLoop open;
  open.points = {0, 1, 2};
  open.times = {0, 1, 2};
  auto f = tl::distance_field(space, 0);
  CHECK_THROWS_AS(tl::loop_integral(space, open, f, f), tl::Error);
}

TEST_CASE("cone extension rejects tiny grids and foreign points") {
  auto space = tl::metric_from_graph(tl::path_graph(4));
  tl::SampledLoop loop;
  loop.points = {0, 1, 0};
  loop.times = {0.0, 0.5, 1.0};
  CHECK_THROWS_AS(tl::cone_extension(space, loop, 0, 4), tl::Error);
  CHECK_THROWS_AS(tl::cone_extension(space, loop, 9, 16), tl::Error);
  tl::SampledLoop foreign;
  foreign.points = {0, 7, 0};
  foreign.times = {0.0, 0.5, 1.0};
  CHECK_THROWS_AS(tl::cone_extension(space, foreign, 0, 16), tl::Error);
}

TEST_CASE("cone extension: constant loop gives a constant map") {
  auto space = tl::metric_from_graph(tl::star_graph(5));
  tl::SampledLoop loop;
  loop.points = {2, 2, 2};
  loop.times = {0.0, 0.5, 1.0};
  auto map = tl::cone_extension(space, loop, 2, 16);
  for (std::size_t node = 0; node < map.grid.size(); ++node)
    if (map.grid.mask[node]) CHECK(map.values[node] == 2);
}

TEST_CASE("cone extension: inner half-disc is the base point, rim is the loop") {
  auto g = tl::random_tree_graph(14, 9, 1.0, 1.0);
  auto space = tl::metric_from_graph(g);
  auto loop = euler_tour_loop(g, 0);
  auto map = tl::cone_extension(space, loop, 0, 32);
  REQUIRE(map.boundary.has_value());
  CHECK(map.boundary->points == loop.points);
  CHECK(map.boundary->times == loop.times);
  for (int j = 0; j < map.grid.ny; ++j)
    for (int i = 0; i < map.grid.nx; ++i) {
      if (!map.grid.in(i, j)) continue;
      const auto [x, y] = map.grid.coord(i, j);
      if (std::hypot(x, y) <= 0.5) CHECK(map.at(i, j) == 0);
    }
}

TEST_CASE("cone extension of tree loops obeys the Lipschitz bound") {
  for (std::uint64_t seed : {4ULL, 8ULL}) {
    auto g = tl::random_tree_graph(12, seed, 1.0, 1.0);
    auto space = tl::metric_from_graph(g);
    auto loop = euler_tour_loop(g, 0);
    auto map = tl::cone_extension(space, loop, 0, 48);
    const double lip_circle = loop.lip_circle(space);
    const double lip_ext = map.lip_est(space);
    CHECK(lip_ext <= 20.0 * lip_circle + 2.0 * map.grid.h);
  }
}

TEST_CASE("circle-normalized loop Lipschitz ignores the time scale") {
  auto g = tl::random_tree_graph(9, 2, 1.0, 1.0);
  auto space = tl::metric_from_graph(g);
  auto unit = euler_tour_loop(g, 0);
  tl::SampledLoop stretched = unit;
  for (auto& t : stretched.times) t *= 42.0;
  CHECK(unit.lip_circle(space) == stretched.lip_circle(space));
  CHECK(unit.lip(space) != stretched.lip(space));
}

TEST_CASE("bicombing: identical endpoints, star leaves, tree bound") {
  auto star = tl::metric_from_graph(tl::star_graph(6));
  auto same = tl::bicombing_check(star, 1, 4, 4, 1.0);
  CHECK(same.max_dev == 0.0);

  auto leaves = tl::bicombing_check(star, 1, 4, 5, 1.0);
  CHECK(leaves.max_dev == star.d(4, 5));  // realized at t = 1
  CHECK(leaves.argmax_t == 1.0);
  CHECK(leaves.pass);

  auto g = tl::random_tree_graph(30, 17, 1.0, 1.0);
  auto tree = tl::metric_from_graph(g);
  tl::Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int x = static_cast<int>(rng.below(tree.n()));
    const int y = static_cast<int>(rng.below(tree.n()));
    const int yp = static_cast<int>(rng.below(tree.n()));
    auto chk = tl::bicombing_check(tree, x, y, yp, 1.0);
    CHECK(chk.pass);
    CHECK(chk.strong_holds);  // trees satisfy the convexity bound outright
  }
}

TEST_CASE("md of the planar identity is exactly one in every direction") {
  auto sample = tl::disc_sample_by_grid(21, tl::NormKind::l2);
  auto map = tl::identity_map(sample);
  auto field = tl::md_field(*sample.space, map);
  CHECK(field.interior_count > 0);
  CHECK(field.converged_count == field.interior_count);
  for (std::size_t node = 0; node < field.interior.size(); ++node) {
    if (!field.interior[node]) continue;
    for (int k = 0; k < field.directions; ++k)
      CHECK_THAT(field.md[node * field.directions + k],
                 Catch::Matchers::WithinAbs(1.0, 2.0 * field.h));
  }
  auto degeneracy = tl::degeneracy_field(field, 0.1);
  CHECK(degeneracy.fraction == 0.0);
  auto seminorm = tl::seminorm_check(field);
  CHECK(seminorm.fraction_within_tol() == 1.0);
  CHECK(seminorm.max_symmetry <= 2.0 * field.h);
}

TEST_CASE("md of a coordinate projection: full rate along x, flat along y") {
  // phi(x, y) = x into a path metric whose edge weight equals the grid step.
  const int m = 17;
  tl::GraphSpec g;
  g.vertex_count = m;
  const double h = 2.0 / (m - 1);
  for (int i = 0; i + 1 < m; ++i) g.edges.push_back({i, i + 1, h});
  auto space = tl::metric_from_graph(g);

  tl::SampledMap map;
  map.grid.nx = map.grid.ny = m;
  map.grid.h = h;
  map.grid.x0 = map.grid.y0 = -1.0;
  map.grid.mask.assign(map.grid.size(), 1);
  map.values.resize(map.grid.size());
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) map.values[map.grid.id(i, j)] = i;

  auto field = tl::md_field(space, map, {4, {4, 2}, -1.0});
  bool saw_interior = false;
  for (std::size_t node = 0; node < field.interior.size(); ++node) {
    if (!field.interior[node] || !field.converged[node]) continue;
    saw_interior = true;
    CHECK_THAT(field.md[node * 4 + 0], Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK_THAT(field.md[node * 4 + 1], Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(field.md[node * 4 + 2], Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK_THAT(field.md[node * 4 + 3], Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
  CHECK(saw_interior);
  // rank-one behavior is degenerate at any threshold
  auto degeneracy = tl::degeneracy_field(field, 0.1);
  CHECK(degeneracy.fraction == 1.0);
}

TEST_CASE("constant maps have vanishing md and full degeneracy") {
  auto space = tl::metric_from_graph(tl::path_graph(3));
  tl::SampledMap map;
  map.grid.nx = map.grid.ny = 16;
  map.grid.h = 2.0 / 15;
  map.grid.x0 = map.grid.y0 = -1.0;
  map.grid.mask.assign(map.grid.size(), 1);
  map.values.assign(map.grid.size(), 1);
  auto field = tl::md_field(space, map);
  for (std::size_t node = 0; node < field.interior.size(); ++node)
    if (field.interior[node])
      for (int k = 0; k < field.directions; ++k)
        CHECK(field.md[node * field.directions + k] == 0.0);
  CHECK(tl::degeneracy_field(field, 0.1).fraction == 1.0);
  auto seminorm = tl::seminorm_check(field);
  CHECK(seminorm.max_homogeneity == 0.0);
  CHECK(seminorm.max_symmetry == 0.0);
  CHECK(seminorm.max_subadditivity == 0.0);
}

TEST_CASE("md rejects bad option combinations") {
  auto sample = tl::disc_sample_by_grid(15, tl::NormKind::l2);
  auto map = tl::identity_map(sample);
  CHECK_THROWS_AS(tl::md_field(*sample.space, map, {5, {4, 2}, -1.0}), tl::Error);
  CHECK_THROWS_AS(tl::md_field(*sample.space, map, {8, {2, 4}, -1.0}), tl::Error);
  CHECK_THROWS_AS(tl::md_field(*sample.space, map, {8, {64, 32}, -1.0}), tl::Error);
}

TEST_CASE("stokes on the identity disc approximates the disc area") {
  auto sample = tl::disc_sample_by_grid(33, tl::NormKind::l2);
  auto [fx, fy] = tl::coordinate_fields(sample);
  auto map = tl::identity_map(sample);
  auto rep = tl::stokes_check(map, fx, fy);
  constexpr double kPi = 3.14159265358979323846;
  CHECK_FALSE(rep.boundary_from_loop);
  CHECK_THAT(rep.boundary_integral, Catch::Matchers::WithinAbs(kPi, 0.12 * kPi));
  CHECK_THAT(rep.area_integral, Catch::Matchers::WithinAbs(kPi, 0.12 * kPi));
}

TEST_CASE("stokes with a constant field vanishes on both sides") {
  auto sample = tl::disc_sample_by_grid(17, tl::NormKind::l2);
  auto [fx, fy] = tl::coordinate_fields(sample);
  tl::ScalarField c;
  c.values.assign(fx.values.size(), 2.0);
  c.lip = 0.0;
  auto rep = tl::stokes_check(tl::identity_map(sample), c, fy);
  CHECK(rep.boundary_integral == 0.0);
  CHECK(rep.area_integral == 0.0);
}

TEST_CASE("stokes on a cone extension uses the exact boundary loop") {
  auto g = tl::random_tree_graph(10, 3, 1.0, 1.0);
  auto space = tl::metric_from_graph(g);
  auto loop = euler_tour_loop(g, 0);
  auto map = tl::cone_extension(space, loop, 0, 32);
  auto f = random_field(space, 31);
  auto pi = random_field(space, 32);
  auto rep = tl::stokes_check(map, f, pi);
  CHECK(rep.boundary_from_loop);
  CHECK(rep.boundary_integral == 0.0);  // retraced rim cancels exactly
  CHECK(std::abs(rep.area_integral) < 60.0 * map.grid.h);
}
