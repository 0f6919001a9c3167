// Measures how far a few sample spaces are from being trees: thin-triangle
// delta, four-point delta, and the worst lens-to-ball distortion.

#include <cstdio>

#include "treelens/treelens.hpp"

namespace tl = treelens;

namespace {

void inspect(const char* name, const tl::FiniteMetricSpace& space) {
  const auto thin = tl::space_thinness(space, 2'000'000, 0);
  const auto four = tl::four_point_delta(space, 2'000'000, 0);
  tl::ScanConfig cfg;
  cfg.with_witness = false;
  const auto profile = tl::diamond_scan(space, cfg);
  std::printf("%-18s n=%3d  delta_thin=%7.4f  delta_4pt=%7.4f  "
              "sup_lambda=%7.4f  sup_gap=%7.4f\n",
              name, space.n(), thin.delta, four.delta, profile.sup_lambda_mult,
              profile.sup_gap_add);
}

}  // namespace

int main() {
  inspect("random tree", tl::metric_from_graph(tl::random_tree_graph(40, 7, 1.0, 3.0)));
  inspect("6-cycle", tl::metric_from_graph(tl::cycle_graph(6)));
  inspect("5x5 grid", tl::metric_from_graph(tl::grid_graph(5, 5)));
  inspect("snowflake line", tl::snowflake_line(33));
  return 0;
}
