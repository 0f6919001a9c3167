#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "treelens/gallery.hpp"
#include "treelens/hyperbolicity.hpp"

namespace tl = treelens;

TEST_CASE("generators are deterministic in (spec, seed)") {
  auto a = tl::metric_from_graph(tl::random_tree_graph(50, 7, 0.5, 3.0));
  auto b = tl::metric_from_graph(tl::random_tree_graph(50, 7, 0.5, 3.0));
  CHECK(a.flat() == b.flat());

  auto p1 = tl::perturbed_tree(20, 9, 0.25, 1.0, 1.0);
  auto p2 = tl::perturbed_tree(20, 9, 0.25, 1.0, 1.0);
  CHECK(p1.flat() == p2.flat());
}

TEST_CASE("every generated space satisfies the metric axioms") {
  std::vector<tl::FiniteMetricSpace> spaces;
  spaces.push_back(tl::generate({tl::SpaceKind::path, 5}));
  spaces.push_back(tl::generate({tl::SpaceKind::star, 7}));
  spaces.push_back(tl::generate({tl::SpaceKind::cycle, 6}));
  {
    tl::GeneratorSpec grid;
    grid.kind = tl::SpaceKind::grid;
    grid.rows = 4;
    grid.cols = 5;
    spaces.push_back(tl::generate(grid));
  }
  {
    tl::GeneratorSpec tree;
    tree.kind = tl::SpaceKind::random_tree;
    tree.n = 30;
    tree.seed = 3;
    tree.weight_lo = 0.5;
    tree.weight_hi = 2.5;
    spaces.push_back(tl::generate(tree));
  }
  {
    tl::GeneratorSpec disc;
    disc.kind = tl::SpaceKind::normed_disc_sample;
    disc.n = 80;
    disc.norm = tl::NormKind::l1;
    spaces.push_back(tl::generate(disc));
  }
  spaces.push_back(tl::snowflake_line(21));
  spaces.push_back(tl::perturbed_tree(15, 2, 0.2, 1.0, 1.0));
  for (const auto& s : spaces)
    CHECK(tl::FiniteMetricSpace::check_matrix(s.flat(), s.n(), 1e-9).empty());
}

TEST_CASE("documented generator values") {
  auto path = tl::generate({tl::SpaceKind::path, 5});
  CHECK(path.n() == 5);
  CHECK(path.d(0, 4) == 4.0);

  auto snow = tl::snowflake_line(3);
  CHECK_THAT(snow.d(0, 2), Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-12));
  CHECK(snow.d(0, 1) == 1.0);
}

TEST_CASE("random trees certify as trees with zero four-point delta") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto tree = tl::metric_from_graph(tl::random_tree_graph(40, seed, 0.5, 3.0));
    auto cert = tl::certify_tree(tree);
    CHECK(cert.is_tree);
    CHECK(cert.delta4 == 0.0);
  }
}

TEST_CASE("perturbed trees stay within the perturbation bound") {
  const double c = 0.3;
  for (std::uint64_t seed : {5ULL, 6ULL}) {
    auto base = tl::metric_from_graph(tl::random_tree_graph(18, seed, 1.0, 1.0));
    auto pert = tl::perturbed_tree(18, seed, c, 1.0, 1.0);
    for (int i = 0; i < base.n(); ++i)
      for (int j = 0; j < base.n(); ++j)
        CHECK(std::abs(pert.d(i, j) - base.d(i, j)) <= c + 1e-12);
  }
}

TEST_CASE("disc samples hit their size target and carry exact coordinates") {
  auto sample = tl::disc_sample_by_count(200, tl::NormKind::l2);
  REQUIRE(sample.space.has_value());
  const int n = static_cast<int>(sample.coords.size());
  CHECK(n >= 200);
  CHECK(n <= 360);  // next lattice size overshoots by bounded factor
  // identity map difference quotients equal one for the Euclidean norm
  auto map = tl::identity_map(sample);
  CHECK_THAT(map.lip_est(*sample.space), Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("euclidean lens diameter: closed form vs dense sample") {
  auto exact = tl::euclidean_lens_diameter(1.0, 0.5);
  CHECK_THAT(exact.closed_form,
             Catch::Matchers::WithinAbs(2.0 * std::sqrt(1.25), 1e-12));
  CHECK_THAT(exact.sampled, Catch::Matchers::WithinRel(exact.closed_form, 0.01));

  auto tiny = tl::euclidean_lens_diameter(1.0, 0.1);
  CHECK_THAT(tiny.sampled, Catch::Matchers::WithinRel(tiny.closed_form, 0.01));
  CHECK(tiny.sample_count >= 50000);

  auto degen = tl::euclidean_lens_diameter(1.0, 0.0);
  CHECK(degen.closed_form == 0.0);
  CHECK(degen.sampled == 0.0);
}

TEST_CASE("lens blow-up curve: frozen ratios and monotone growth") {
  auto rows = tl::lens_blowup_curve(1.0, {0.5, 0.05, 0.005});
  REQUIRE(rows.size() == 3);
  CHECK_THAT(rows[0].ratio, Catch::Matchers::WithinAbs(4.47213595499958, 1e-9));
  CHECK_THAT(rows[1].ratio, Catch::Matchers::WithinAbs(12.8062484748657, 1e-9));
  CHECK_THAT(rows[2].ratio, Catch::Matchers::WithinAbs(40.0499687890016, 1e-9));
  CHECK(rows[0].ratio < rows[1].ratio);
  CHECK(rows[1].ratio < rows[2].ratio);

  CHECK_THROWS_AS(tl::lens_blowup_curve(1.0, {0.1, 0.5}), tl::Error);
  CHECK_THROWS_AS(tl::lens_blowup_curve(0.0, {0.5}), tl::Error);
}

TEST_CASE("blow-up ratio grows by about sqrt(10) per decade of h") {
  auto rows = tl::lens_blowup_curve(2.0, {1e-2, 1e-3, 1e-4, 1e-5});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double factor = rows[i].ratio / rows[i - 1].ratio;
    CHECK_THAT(factor, Catch::Matchers::WithinRel(std::sqrt(10.0), 0.01));
  }
}

TEST_CASE("generator input validation") {
  CHECK_THROWS_AS(tl::generate({tl::SpaceKind::path, 0}), tl::Error);
  CHECK_THROWS_AS(tl::snowflake_line(5, 1.0, 1.5), tl::Error);
  CHECK_THROWS_AS(tl::random_tree_graph(5, 0, 2.0, 1.0), tl::Error);
  tl::GeneratorSpec big_disc;
  big_disc.kind = tl::SpaceKind::normed_disc_sample;
  big_disc.n = 100000;
  CHECK_THROWS_AS(tl::generate(big_disc), tl::Error);
}
