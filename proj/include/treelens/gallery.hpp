#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treelens/lipschitz.hpp"
#include "treelens/metric_space.hpp"
#include "treelens/rng.hpp"

namespace treelens {

enum class SpaceKind {
  path,
  star,
  cycle,
  grid,
  random_tree,
  normed_disc_sample,
  snowflake_line,
  perturbed_tree,
};

enum class NormKind { l1, l2, linf };

struct GeneratorSpec {
  SpaceKind kind = SpaceKind::path;
  int n = 0;               // point count (target for disc samples)
  int rows = 0, cols = 0;  // grid graphs; square n x n when only n is given
  std::uint64_t seed = 0;
  double weight_lo = 1.0, weight_hi = 1.0;  // random_tree edge weights
  NormKind norm = NormKind::l2;
  double exponent = 0.5;  // snowflake
  double spacing = 1.0;   // snowflake sample spacing
  double perturbation = 0.0;  // perturbed_tree bound c
};

inline const char* to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::path: return "path";
    case SpaceKind::star: return "star";
    case SpaceKind::cycle: return "cycle";
    case SpaceKind::grid: return "grid";
    case SpaceKind::random_tree: return "random_tree";
    case SpaceKind::normed_disc_sample: return "normed_disc_sample";
    case SpaceKind::snowflake_line: return "snowflake_line";
    case SpaceKind::perturbed_tree: return "perturbed_tree";
  }
  return "?";
}

inline const char* to_string(NormKind k) {
  switch (k) {
    case NormKind::l1: return "l1";
    case NormKind::l2: return "l2";
    case NormKind::linf: return "linf";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Graph builders.

inline GraphSpec path_graph(int n) {
  if (n < 1) throw Error(errkind::invalid_spec, "path needs n >= 1");
  GraphSpec g;
  g.vertex_count = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1, 1.0});
  return g;
}

inline GraphSpec star_graph(int n) {
  if (n < 1) throw Error(errkind::invalid_spec, "star needs n >= 1");
  GraphSpec g;
  g.vertex_count = n;  // center is vertex 0
  for (int i = 1; i < n; ++i) g.edges.push_back({0, i, 1.0});
  return g;
}

inline GraphSpec cycle_graph(int n) {
  if (n < 3) throw Error(errkind::invalid_spec, "cycle needs n >= 3");
  GraphSpec g;
  g.vertex_count = n;
  for (int i = 0; i < n; ++i) g.edges.push_back({i, (i + 1) % n, 1.0});
  return g;
}

inline GraphSpec grid_graph(int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error(errkind::invalid_spec, "grid needs rows, cols >= 1");
  GraphSpec g;
  g.vertex_count = rows * cols;
  auto id = [&](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) g.edges.push_back({id(r, c), id(r, c + 1), 1.0});
      if (r + 1 < rows) g.edges.push_back({id(r, c), id(r + 1, c), 1.0});
    }
  return g;
}

// Random attachment tree. Weights are drawn on a 1/8 lattice inside
// [weight_lo, weight_hi] so that path sums stay exact in binary floating
// point; exact-zero hyperbolicity statistics depend on this.
inline GraphSpec random_tree_graph(int n, std::uint64_t seed, double weight_lo = 1.0,
                                   double weight_hi = 1.0) {
  if (n < 1) throw Error(errkind::invalid_spec, "tree needs n >= 1");
  if (!(weight_lo > 0.0) || weight_hi < weight_lo)
    throw Error(errkind::invalid_spec, "need 0 < weight_lo <= weight_hi");
  const std::int64_t lo8 = static_cast<std::int64_t>(std::ceil(weight_lo * 8.0 - 1e-12));
  const std::int64_t hi8 = static_cast<std::int64_t>(std::floor(weight_hi * 8.0 + 1e-12));
  if (lo8 > hi8 || lo8 < 1)
    throw Error(errkind::invalid_spec, "weight range contains no multiple of 1/8");
  Rng rng(seed);
  GraphSpec g;
  g.vertex_count = n;
  for (int i = 1; i < n; ++i) {
    const int parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    const double w = static_cast<double>(lo8 + static_cast<std::int64_t>(
                                                   rng.below(hi8 - lo8 + 1))) /
                     8.0;
    g.edges.push_back({parent, i, w});
  }
  return g;
}

// ---------------------------------------------------------------------------
// Matrix builders.

// Equally spaced reals with d(x, y) = (spacing * |i - j|)^exponent. Balls are
// index intervals, yet midpoints fail badly for exponents below 1.
inline FiniteMetricSpace snowflake_line(int n, double spacing = 1.0,
                                        double exponent = 0.5) {
  if (n < 1) throw Error(errkind::invalid_spec, "snowflake needs n >= 1");
  if (!(spacing > 0.0)) throw Error(errkind::invalid_spec, "spacing must be positive");
  if (!(exponent > 0.0 && exponent <= 1.0))
    throw Error(errkind::invalid_spec, "exponent must lie in (0, 1]");
  std::vector<double> flat(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = std::pow(spacing * (j - i), exponent);
      flat[static_cast<std::size_t>(i) * n + j] = v;
      flat[static_cast<std::size_t>(j) * n + i] = v;
    }
  return FiniteMetricSpace::from_matrix(std::move(flat), n);
}

// Tree metric plus the point-weight perturbation d(i,j) + g_i + g_j with
// g in [0, c/2]; the triangle inequality survives any such shift, the
// entrywise change is at most c, and the result is generally no longer a
// tree metric.
inline FiniteMetricSpace perturbed_tree(int n, std::uint64_t seed, double c,
                                        double weight_lo = 1.0,
                                        double weight_hi = 1.0) {
  if (!(c >= 0.0)) throw Error(errkind::invalid_spec, "perturbation must be >= 0");
  auto base = metric_from_graph(random_tree_graph(n, seed, weight_lo, weight_hi));
  Rng rng(seed ^ 0x70657274ULL);
  std::vector<double> g(n);
  for (auto& v : g) v = rng.unit() * (c / 2.0);
  std::vector<double> flat(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = base.d(i, j) + g[i] + g[j];
      flat[static_cast<std::size_t>(i) * n + j] = v;
      flat[static_cast<std::size_t>(j) * n + i] = v;
    }
  auto violations = FiniteMetricSpace::check_matrix(flat, n, base.tol());
  if (!violations.empty())
    throw Error(errkind::perturbation_broke_metric, violations.front().describe());
  return FiniteMetricSpace::trusted(std::move(flat), n, base.tol());
}

// ---------------------------------------------------------------------------
// Normed-plane disc samples.

// Lattice sample of the unit disc of a norm, together with the grid layout
// and node-to-point map so planar maps into the sample can be built exactly.
struct DiscSample {
  Grid grid;
  std::vector<std::int32_t> node_point;      // -1 off the disc
  std::vector<std::array<double, 2>> coords; // per point
  NormKind norm = NormKind::l2;
  std::optional<FiniteMetricSpace> space;    // absent when metric was skipped
};

inline double norm_value(NormKind k, double x, double y) {
  switch (k) {
    case NormKind::l1: return std::abs(x) + std::abs(y);
    case NormKind::l2: return std::hypot(x, y);
    case NormKind::linf: return std::max(std::abs(x), std::abs(y));
  }
  return 0.0;
}

// m lattice nodes per axis over [-1, 1]^2, keeping nodes inside the closed
// unit ball of the norm. with_metric materializes the n^2 distance matrix;
// leave it off for large grids when only fields and maps are needed.
inline DiscSample disc_sample_by_grid(int m, NormKind norm, bool with_metric = true) {
  if (m < 3) throw Error(errkind::invalid_spec, "disc sample needs m >= 3");
  DiscSample out;
  out.norm = norm;
  out.grid.nx = out.grid.ny = m;
  out.grid.h = 2.0 / (m - 1);
  out.grid.x0 = out.grid.y0 = -1.0;
  out.grid.mask.assign(out.grid.size(), 0);
  out.node_point.assign(out.grid.size(), -1);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const auto [x, y] = out.grid.coord(i, j);
      if (norm_value(norm, x, y) <= 1.0 + 1e-12) {
        out.grid.mask[out.grid.id(i, j)] = 1;
        out.node_point[out.grid.id(i, j)] =
            static_cast<std::int32_t>(out.coords.size());
        out.coords.push_back({x, y});
      }
    }
  if (with_metric) {
    const int n = static_cast<int>(out.coords.size());
    std::vector<double> flat(static_cast<std::size_t>(n) * n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const double v = norm_value(norm, out.coords[a][0] - out.coords[b][0],
                                    out.coords[a][1] - out.coords[b][1]);
        flat[static_cast<std::size_t>(a) * n + b] = v;
        flat[static_cast<std::size_t>(b) * n + a] = v;
      }
    out.space = FiniteMetricSpace::trusted(std::move(flat), n);
  }
  return out;
}

inline DiscSample disc_sample_by_count(int target, NormKind norm,
                                       bool with_metric = true) {
  if (target < 5) throw Error(errkind::invalid_spec, "disc sample needs n >= 5");
  if (target > 3600)
    throw Error(errkind::invalid_spec,
                "disc sample capped at 3600 points (distance matrix size)");
  int m = 3;
  for (;; ++m) {
    const auto probe = disc_sample_by_grid(m, norm, false);
    if (static_cast<int>(probe.coords.size()) >= target) break;
  }
  return disc_sample_by_grid(m, norm, with_metric);
}

inline SampledMap identity_map(const DiscSample& sample) {
  SampledMap map;
  map.grid = sample.grid;
  map.values = sample.node_point;
  return map;
}

// Coordinate projections; 1-Lipschitz for every supported norm.
inline std::pair<ScalarField, ScalarField> coordinate_fields(const DiscSample& s) {
  ScalarField fx, fy;
  fx.lip = fy.lip = 1.0;
  fx.values.reserve(s.coords.size());
  fy.values.reserve(s.coords.size());
  for (const auto& c : s.coords) {
    fx.values.push_back(c[0]);
    fy.values.push_back(c[1]);
  }
  return {std::move(fx), std::move(fy)};
}

// ---------------------------------------------------------------------------
// Dispatch.

inline FiniteMetricSpace generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case SpaceKind::path: return metric_from_graph(path_graph(spec.n));
    case SpaceKind::star: return metric_from_graph(star_graph(spec.n));
    case SpaceKind::cycle: return metric_from_graph(cycle_graph(spec.n));
    case SpaceKind::grid: {
      const int rows = spec.rows > 0 ? spec.rows : spec.n;
      const int cols = spec.cols > 0 ? spec.cols : rows;
      return metric_from_graph(grid_graph(rows, cols));
    }
    case SpaceKind::random_tree:
      return metric_from_graph(
          random_tree_graph(spec.n, spec.seed, spec.weight_lo, spec.weight_hi));
    case SpaceKind::normed_disc_sample: {
      auto sample = disc_sample_by_count(spec.n, spec.norm, true);
      return *std::move(sample.space);
    }
    case SpaceKind::snowflake_line:
      return snowflake_line(spec.n, spec.spacing, spec.exponent);
    case SpaceKind::perturbed_tree:
      return perturbed_tree(spec.n, spec.seed, spec.perturbation, spec.weight_lo,
                            spec.weight_hi);
  }
  throw Error(errkind::invalid_spec, "unknown generator kind");
}

// ---------------------------------------------------------------------------
// Euclidean lens blow-up.

struct LensDemoResult {
  double closed_form = 0.0;
  double sampled = 0.0;
  std::uint64_t sample_count = 0;
};

// Diameter of the intersection of two Euclidean discs of radius r1*(1+h)
// whose centers sit at distance 2*r1: closed form 2*sqrt(2h+h^2)*r1, checked
// against a dense lattice sample of the lens. The sampled diameter only needs
// per-column extreme points, which realize the maximal pair.
inline LensDemoResult euclidean_lens_diameter(double r1, double h,
                                              std::uint64_t samples = 100000) {
  if (!(r1 > 0.0) || !(h >= 0.0))
    throw Error(errkind::parameter_out_of_range, "need r1 > 0 and h >= 0");
  LensDemoResult out;
  out.closed_form = 2.0 * std::sqrt(2.0 * h + h * h) * r1;
  if (h == 0.0) {
    out.sampled = 0.0;  // the lens degenerates to the single midpoint
    out.sample_count = 1;
    return out;
  }
  const double R = r1 * (1.0 + h);
  const double x_lo = r1 * (1.0 - h), x_hi = R;
  const double half_w = r1 * std::sqrt(2.0 * h + h * h);

  const double width = x_hi - x_lo, height = 2.0 * half_w;
  int nx = static_cast<int>(std::lround(std::sqrt(
      static_cast<double>(samples) * width / std::max(height, 1e-300))));
  nx = std::max(nx, 2);
  int ny = static_cast<int>(samples / static_cast<std::uint64_t>(nx));
  ny = std::max(ny, 2);

  std::vector<std::array<double, 2>> extremes;
  for (int ix = 0; ix < nx; ++ix) {
    const double x = x_lo + (x_hi - x_lo) * ix / (nx - 1);
    double top = -1.0, bottom = 1.0;
    bool hit = false;
    for (int iy = 0; iy < ny; ++iy) {
      const double y = -half_w + 2.0 * half_w * iy / (ny - 1);
      const bool inside = x * x + y * y <= R * R &&
                          (x - 2.0 * r1) * (x - 2.0 * r1) + y * y <= R * R;
      if (!inside) continue;
      hit = true;
      top = std::max(top, y);
      bottom = std::min(bottom, y);
    }
    if (hit) {
      extremes.push_back({x, top});
      extremes.push_back({x, bottom});
    }
  }
  double best = 0.0;
  for (std::size_t a = 0; a < extremes.size(); ++a)
    for (std::size_t b = a + 1; b < extremes.size(); ++b)
      best = std::max(best, std::hypot(extremes[a][0] - extremes[b][0],
                                       extremes[a][1] - extremes[b][1]));
  out.sampled = best;
  out.sample_count = static_cast<std::uint64_t>(nx) * ny;
  return out;
}

struct BlowupRow {
  double h = 0.0;
  double diam = 0.0;   // closed-form lens diameter
  double ratio = 0.0;  // diam / h = 2*r1*sqrt(2/h + 1)
};

// diam/h blows up like 1/sqrt(h): the signature that Euclidean lens geometry
// is incompatible with any bounded lens-to-ball distortion.
inline std::vector<BlowupRow> lens_blowup_curve(double r1,
                                                const std::vector<double>& h_list) {
  if (!(r1 > 0.0)) throw Error(errkind::parameter_out_of_range, "need r1 > 0");
  if (h_list.empty())
    throw Error(errkind::parameter_out_of_range, "empty h list");
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0.0))
      throw Error(errkind::parameter_out_of_range, "h values must be positive");
    if (i > 0 && h_list[i] >= h_list[i - 1])
      throw Error(errkind::parameter_out_of_range, "h values must descend");
  }
  std::vector<BlowupRow> rows;
  rows.reserve(h_list.size());
  for (double h : h_list) {
    BlowupRow row;
    row.h = h;
    row.diam = 2.0 * std::sqrt(2.0 * h + h * h) * r1;
    row.ratio = 2.0 * r1 * std::sqrt(2.0 / h + 1.0);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace treelens
