#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "treelens/geodesic.hpp"
#include "treelens/metric_space.hpp"

namespace treelens {

// ---------------------------------------------------------------------------
// Scalar fields and loops.

struct ScalarField {
  std::vector<double> values;  // one per space point
  double lip = 0.0;            // declared Lipschitz constant

  double operator()(int p) const { return values[p]; }
};

struct FieldViolation {
  int i = -1, j = -1;
  double excess = 0.0;
};

inline std::optional<FieldViolation> field_lipschitz_violation(
    const FiniteMetricSpace& space, const ScalarField& f, double tol = 1e-9) {
  if (static_cast<int>(f.values.size()) != space.n())
    throw Error(errkind::invalid_spec, "field size does not match the space");
  FieldViolation worst;
  for (int i = 0; i < space.n(); ++i)
    for (int j = i + 1; j < space.n(); ++j) {
      const double excess =
          std::abs(f.values[i] - f.values[j]) - f.lip * space.d(i, j);
      if (excess > worst.excess) worst = {i, j, excess};
    }
  if (worst.excess > tol) return worst;
  return std::nullopt;
}

inline void validate_field(const FiniteMetricSpace& space, const ScalarField& f,
                           double tol = 1e-9) {
  if (auto v = field_lipschitz_violation(space, f, tol))
    throw Error(errkind::field_not_lipschitz,
                "field exceeds its Lipschitz constant at pair (" +
                    std::to_string(v->i) + "," + std::to_string(v->j) + ") by " +
                    std::to_string(v->excess));
}

// f(p) = max(0, 1 - dist(p, S)/eps); a 1/eps-Lipschitz bump supported on the
// eps-neighborhood of S, equal to 1 on S.
inline ScalarField bump_field(const FiniteMetricSpace& space,
                              std::span<const int> S, double eps) {
  if (S.empty()) throw Error(errkind::invalid_spec, "bump support is empty");
  if (!(eps > 0.0)) throw Error(errkind::parameter_out_of_range, "eps must be positive");
  ScalarField f;
  f.lip = 1.0 / eps;
  f.values.resize(space.n());
  for (int p = 0; p < space.n(); ++p) {
    double dmin = std::numeric_limits<double>::infinity();
    for (int q : S) dmin = std::min(dmin, space.d(p, q));
    f.values[p] = std::max(0.0, 1.0 - dmin / eps);
  }
  return f;
}

inline ScalarField distance_field(const FiniteMetricSpace& space, int x0) {
  if (x0 < 0 || x0 >= space.n())
    throw Error(errkind::parameter_out_of_range, "base point out of range");
  ScalarField f;
  f.lip = 1.0;
  f.values.assign(space.row(x0).begin(), space.row(x0).end());
  return f;
}

// A sampled closed curve: strictly increasing times with the last sample
// identified to the first (points.front() == points.back()).
struct SampledLoop {
  std::vector<double> times;
  std::vector<int> points;

  int segments() const { return static_cast<int>(points.size()) - 1; }
  double period() const { return times.back() - times.front(); }

  void validate(const FiniteMetricSpace& space) const {
    if (points.size() < 2 || points.size() != times.size())
      throw Error(errkind::invalid_spec, "loop needs matching times and points");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw Error(errkind::invalid_spec, "loop times must be strictly increasing");
    for (int p : points)
      if (p < 0 || p >= space.n())
        throw Error(errkind::parameter_out_of_range, "loop point out of range");
    if (points.front() != points.back())
      throw Error(errkind::loop_not_closed, "loop endpoints differ");
  }

  double lip(const FiniteMetricSpace& space) const {
    double worst = 0.0;
    for (int i = 0; i < segments(); ++i)
      worst = std::max(worst, space.d(points[i], points[i + 1]) /
                                  (times[i + 1] - times[i]));
    return worst;
  }

  // Lipschitz constant against the boundary angle of the unit disc: sample
  // times are normalized to fractions of the period and scaled by 2*pi.
  // Parameterization-invariant, which is what cone-extension bounds need.
  double lip_circle(const FiniteMetricSpace& space) const {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    double worst = 0.0;
    for (int i = 0; i < segments(); ++i)
      worst = std::max(worst, space.d(points[i], points[i + 1]) * period() /
                                  (kTwoPi * (times[i + 1] - times[i])));
    return worst;
  }

  SampledLoop reversed() const {
    SampledLoop r;
    r.points.assign(points.rbegin(), points.rend());
    r.times.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
      r.times[i] = times.front() + (times.back() - times[times.size() - 1 - i]);
    return r;
  }
};

struct LoopIntegral {
  double value = 0.0;
  std::uint64_t segments = 0;  // distinct unordered segments with nonzero traffic
};

// Trapezoid Stieltjes integral of f d(pi) along the loop. Terms are grouped
// by unordered segment so retraced traffic cancels exactly in floating
// arithmetic (each segment contributes coefficient * net signed count).
inline LoopIntegral loop_integral(const FiniteMetricSpace& space,
                                  const SampledLoop& loop, const ScalarField& f,
                                  const ScalarField& pi) {
  loop.validate(space);
  if (static_cast<int>(f.values.size()) != space.n() ||
      static_cast<int>(pi.values.size()) != space.n())
    throw Error(errkind::invalid_spec, "field size does not match the space");

  std::map<std::pair<int, int>, std::int64_t> net;
  for (int i = 0; i < loop.segments(); ++i) {
    const int a = loop.points[i], b = loop.points[i + 1];
    if (a == b) continue;
    if (a < b)
      ++net[{a, b}];
    else
      --net[{b, a}];
  }
  LoopIntegral out;
  for (const auto& [seg, count] : net) {
    if (count == 0) continue;
    ++out.segments;
    const auto [a, b] = seg;
    const double coef = 0.5 * (f.values[a] + f.values[b]);
    out.value += static_cast<double>(count) * coef * (pi.values[b] - pi.values[a]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planar grids and sampled maps.

struct Grid {
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0;  // coordinate of node (0, 0)
  double h = 1.0;             // spacing
  std::vector<std::uint8_t> mask;  // row-major, index j*nx + i

  std::size_t id(int i, int j) const {
    return static_cast<std::size_t>(j) * nx + i;
  }
  bool in(int i, int j) const {
    return i >= 0 && i < nx && j >= 0 && j < ny && mask[id(i, j)] != 0;
  }
  std::pair<double, double> coord(int i, int j) const {
    return {x0 + i * h, y0 + j * h};
  }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
};

// A map from the masked grid into a finite metric space: per-node point
// indices (-1 outside the mask). Cone extensions keep the generating loop as
// the exact boundary parameterization.
struct SampledMap {
  Grid grid;
  std::vector<std::int32_t> values;
  std::optional<SampledLoop> boundary;

  int at(int i, int j) const { return values[grid.id(i, j)]; }

  // Every in-mask node must map to a valid point index.
  void validate(int point_count) const {
    if (values.size() != grid.size())
      throw Error(errkind::invalid_spec, "map value count does not match grid");
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i)
        if (grid.in(i, j) && (at(i, j) < 0 || at(i, j) >= point_count))
          throw Error(errkind::parameter_out_of_range,
                      "map value out of range at node (" + std::to_string(i) +
                          "," + std::to_string(j) + ")");
    if (boundary) {
      for (int p : boundary->points)
        if (p < 0 || p >= point_count)
          throw Error(errkind::parameter_out_of_range,
                      "boundary loop point out of range");
    }
  }

  // Max difference quotient over adjacent in-mask node pairs (axis and
  // diagonal neighbors).
  double lip_est(const FiniteMetricSpace& space) const {
    static constexpr int dx[4] = {1, 0, 1, 1};
    static constexpr int dy[4] = {0, 1, 1, -1};
    const double diag = std::sqrt(2.0);
    double worst = 0.0;
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        if (!grid.in(i, j)) continue;
        for (int k = 0; k < 4; ++k) {
          const int i2 = i + dx[k], j2 = j + dy[k];
          if (!grid.in(i2, j2)) continue;
          const double step = (k < 2 ? 1.0 : diag) * grid.h;
          worst = std::max(worst, space.d(at(i, j), at(i2, j2)) / step);
        }
      }
    return worst;
  }
};

// Radial geodesic filling of a loop from a base point: constant x0 on the
// inner half-disc, then along the geodesic from x0 to the loop point at the
// nearest sampled angle, reaching it at the rim. The input loop is attached
// as the exact boundary row.
inline SampledMap cone_extension(const FiniteMetricSpace& space,
                                 const SampledLoop& loop, int x0, int grid_n) {
  loop.validate(space);
  if (x0 < 0 || x0 >= space.n())
    throw Error(errkind::parameter_out_of_range, "base point out of range");
  if (grid_n < 8)
    throw Error(errkind::parameter_out_of_range, "grid resolution below 8");

  SampledMap map;
  map.grid.nx = map.grid.ny = grid_n;
  map.grid.h = 2.0 / (grid_n - 1);
  map.grid.x0 = map.grid.y0 = -1.0;
  map.grid.mask.assign(map.grid.size(), 0);
  map.values.assign(map.grid.size(), -1);
  map.boundary = loop;

  const int n_samples = loop.segments();  // loop.points[0..n_samples-1] distinct times
  const double period = loop.period();
  std::vector<double> fractions(n_samples);
  for (int i = 0; i < n_samples; ++i)
    fractions[i] = (loop.times[i] - loop.times.front()) / period;

  auto nearest_sample = [&](double frac) {
    int best = 0;
    double best_dev = 2.0;
    for (int i = 0; i < n_samples; ++i) {
      double dev = std::abs(fractions[i] - frac);
      dev = std::min(dev, 1.0 - dev);
      if (dev < best_dev) {
        best_dev = dev;
        best = i;
      }
    }
    return best;
  };

  std::map<int, DiscreteGeodesic> rays;  // geodesics from x0, keyed by target
  constexpr double kTwoPi = 6.283185307179586476925286766559;

  for (int j = 0; j < grid_n; ++j)
    for (int i = 0; i < grid_n; ++i) {
      const auto [x, y] = map.grid.coord(i, j);
      const double rho = std::hypot(x, y);
      if (rho > 1.0 + 1e-12) continue;
      map.grid.mask[map.grid.id(i, j)] = 1;
      if (rho <= 0.5) {
        map.values[map.grid.id(i, j)] = x0;
        continue;
      }
      double theta = std::atan2(y, x);
      if (theta < 0.0) theta += kTwoPi;
      const int target = loop.points[nearest_sample(theta / kTwoPi)];
      auto it = rays.find(target);
      if (it == rays.end())
        it = rays.emplace(target, canonical_geodesic(space, x0, target)).first;
      const double len = it->second.length();
      const double arc = std::clamp(2.0 * (rho - 0.5) * len, 0.0, len);
      map.values[map.grid.id(i, j)] = eval_geodesic(it->second, arc);
    }
  return map;
}

// ---------------------------------------------------------------------------
// Bicombing bound: geodesics from a shared base point diverge no faster than
// a fixed multiple of their endpoint distance.

struct BicombingCheck {
  double max_dev = 0.0;
  double argmax_t = 0.0;
  double endpoint_distance = 0.0;
  double bound = 0.0;       // 4 * lambda * d(y, y')
  double allowance = 0.0;   // one resolution quantum
  bool pass = true;
  bool strong_holds = true;  // max_dev <= d(y, y'), the tree-convexity bound
};

inline BicombingCheck bicombing_check(const FiniteMetricSpace& space, int x, int y,
                                      int yp, double lambda, double tau = 1e-9) {
  const auto c = canonical_geodesic(space, x, y);
  const auto cp = canonical_geodesic(space, x, yp);
  BicombingCheck out;
  out.endpoint_distance = space.d(y, yp);
  out.bound = 4.0 * lambda * out.endpoint_distance;
  out.allowance = space.quantum();

  std::vector<double> ts{0.0, 1.0};
  if (c.length() > 0.0)
    for (double s : c.arclen) ts.push_back(s / c.length());
  if (cp.length() > 0.0)
    for (double s : cp.arclen) ts.push_back(s / cp.length());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  for (double t : ts) {
    const int a = eval_geodesic(c, t * c.length());
    const int b = eval_geodesic(cp, t * cp.length());
    const double dev = space.d(a, b);
    if (dev > out.max_dev) {
      out.max_dev = dev;
      out.argmax_t = t;
    }
  }
  out.pass = out.max_dev <= out.bound + out.allowance + tau;
  out.strong_holds = out.max_dev <= out.endpoint_distance + tau;
  return out;
}

// ---------------------------------------------------------------------------
// Metric directional derivative fields.

struct MdOptions {
  int directions = 16;                 // equally spaced angles; must be even
  std::vector<int> scales{4, 2};       // descending multiples of the grid step
  double conv_tol = -1.0;              // absolute; <0 picks 0.1*max(1, lip_est)
};

struct MdField {
  int nx = 0, ny = 0;
  double h = 0.0;
  int directions = 0;
  std::vector<int> scales;
  double conv_tol = 0.0;
  double lip_est = 0.0;

  std::vector<std::uint8_t> interior;   // full stencil available
  std::vector<std::uint8_t> converged;  // scale ladder agrees within conv_tol
  std::vector<double> md;               // node*directions, smallest-scale estimate
  std::vector<double> ladder_dev;       // per node, max over dirs across scales

  std::size_t id(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  std::uint64_t interior_count = 0;
  std::uint64_t converged_count = 0;
};

// Finite-difference estimates of md phi_z(v) = lim d(phi(z + r v), phi(z))/r:
// directions are snapped to lattice offsets, the quotient uses the actual
// snapped displacement, and a node counts as converged only when the whole
// scale ladder agrees within conv_tol for every direction. The limit exists
// only almost everywhere, so unconverged nodes are flagged, not forced.
inline MdField md_field(const FiniteMetricSpace& space, const SampledMap& map,
                        const MdOptions& opts = {}) {
  if (opts.directions < 4 || opts.directions % 2 != 0)
    throw Error(errkind::parameter_out_of_range,
                "need an even direction count of at least 4");
  if (opts.scales.empty())
    throw Error(errkind::parameter_out_of_range, "empty scale ladder");
  for (std::size_t i = 1; i < opts.scales.size(); ++i)
    if (opts.scales[i] >= opts.scales[i - 1])
      throw Error(errkind::parameter_out_of_range, "scales must descend");

  map.validate(space.n());
  const Grid& g = map.grid;
  MdField field;
  field.nx = g.nx;
  field.ny = g.ny;
  field.h = g.h;
  field.directions = opts.directions;
  field.scales = opts.scales;
  field.lip_est = map.lip_est(space);
  field.conv_tol =
      opts.conv_tol >= 0.0 ? opts.conv_tol : 0.1 * std::max(1.0, field.lip_est);

  const int D = opts.directions;
  const int S = static_cast<int>(opts.scales.size());
  constexpr double kTwoPi = 6.283185307179586476925286766559;

  // Lattice offsets per (scale, direction).
  std::vector<std::pair<int, int>> offsets(static_cast<std::size_t>(S) * D);
  for (int s = 0; s < S; ++s)
    for (int k = 0; k < D; ++k) {
      const double ang = kTwoPi * k / D;
      offsets[static_cast<std::size_t>(s) * D + k] = {
          static_cast<int>(std::lround(opts.scales[s] * std::cos(ang))),
          static_cast<int>(std::lround(opts.scales[s] * std::sin(ang)))};
    }
  for (const auto& [di, dj] : offsets)
    if (di == 0 && dj == 0)
      throw Error(errkind::parameter_out_of_range, "scale too small for the grid");

  field.interior.assign(g.size(), 0);
  field.converged.assign(g.size(), 0);
  field.md.assign(g.size() * D, 0.0);
  field.ladder_dev.assign(g.size(), 0.0);

  std::vector<double> est(static_cast<std::size_t>(S) * D);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!g.in(i, j)) continue;
      bool interior = true;
      for (const auto& [di, dj] : offsets)
        if (!g.in(i + di, j + dj)) {
          interior = false;
          break;
        }
      if (!interior) continue;
      const std::size_t node = g.id(i, j);
      field.interior[node] = 1;
      ++field.interior_count;

      const int base = map.at(i, j);
      for (int s = 0; s < S; ++s)
        for (int k = 0; k < D; ++k) {
          const auto [di, dj] = offsets[static_cast<std::size_t>(s) * D + k];
          const double step = g.h * std::hypot(double(di), double(dj));
          est[static_cast<std::size_t>(s) * D + k] =
              space.d(base, map.at(i + di, j + dj)) / step;
        }
      double dev = 0.0;
      for (int k = 0; k < D; ++k) {
        for (int s = 1; s < S; ++s)
          dev = std::max(dev, std::abs(est[static_cast<std::size_t>(s) * D + k] -
                                       est[static_cast<std::size_t>(s - 1) * D + k]));
        field.md[node * D + k] = est[static_cast<std::size_t>(S - 1) * D + k];
      }
      field.ladder_dev[node] = dev;
      if (dev <= field.conv_tol) {
        field.converged[node] = 1;
        ++field.converged_count;
      }
    }

  if (field.interior_count == 0)
    throw Error(errkind::domain_too_small, "no interior node has a full stencil");
  return field;
}

struct SeminormReport {
  std::uint64_t nodes_checked = 0;     // converged interior nodes
  std::uint64_t nodes_within_tol = 0;  // all residuals under conv_tol
  double max_homogeneity = 0.0;
  double max_symmetry = 0.0;
  double max_direction_lip = 0.0;
  double max_subadditivity = 0.0;
  double tol = 0.0;

  double fraction_within_tol() const {
    return nodes_checked == 0
               ? 1.0
               : static_cast<double>(nodes_within_tol) / nodes_checked;
  }
};

// Residuals of the seminorm axioms the limiting derivative must satisfy:
// scale homogeneity (ladder agreement), symmetry md(v) = md(-v), the
// |md(v) - md(v')| <= Lip |v - v'| direction bound, and subadditivity on
// sampled direction pairs.
inline SeminormReport seminorm_check(const MdField& field) {
  SeminormReport rep;
  rep.tol = field.conv_tol;
  const int D = field.directions;
  constexpr double kTwoPi = 6.283185307179586476925286766559;

  std::vector<double> ux(D), uy(D);
  for (int k = 0; k < D; ++k) {
    ux[k] = std::cos(kTwoPi * k / D);
    uy[k] = std::sin(kTwoPi * k / D);
  }
  const double pair_norm = 2.0 * std::cos(kTwoPi / D);  // |u_k + u_{k+2}|

  for (std::size_t node = 0; node < field.interior.size(); ++node) {
    if (!field.interior[node] || !field.converged[node]) continue;
    ++rep.nodes_checked;
    const double* md = field.md.data() + node * D;

    const double homog = field.ladder_dev[node];
    double sym = 0.0;
    for (int k = 0; k < D / 2; ++k)
      sym = std::max(sym, std::abs(md[k] - md[k + D / 2]));
    double dlip = 0.0;
    for (int a = 0; a < D; ++a)
      for (int b = a + 1; b < D; ++b) {
        const double chord = std::hypot(ux[a] - ux[b], uy[a] - uy[b]);
        dlip = std::max(dlip,
                        std::abs(md[a] - md[b]) - field.lip_est * chord);
      }
    double subadd = 0.0;
    for (int k = 0; k < D; ++k) {
      const int mid = (k + 1) % D, far = (k + 2) % D;
      subadd = std::max(subadd, pair_norm * md[mid] - md[k] - md[far]);
    }

    rep.max_homogeneity = std::max(rep.max_homogeneity, homog);
    rep.max_symmetry = std::max(rep.max_symmetry, sym);
    rep.max_direction_lip = std::max(rep.max_direction_lip, std::max(0.0, dlip));
    rep.max_subadditivity = std::max(rep.max_subadditivity, std::max(0.0, subadd));
    if (homog <= rep.tol && sym <= rep.tol && dlip <= rep.tol && subadd <= rep.tol)
      ++rep.nodes_within_tol;
  }
  return rep;
}

struct DegeneracyReport {
  double fraction = 0.0;  // over converged interior nodes
  std::uint64_t degenerate = 0;
  std::uint64_t converged = 0;
  double tau = 0.0;
  std::vector<std::uint8_t> mask;  // per node
};

// A node is degenerate when some direction moves the image an order of
// magnitude less than the widest one: min_dir md < tau * max_dir md.
inline DegeneracyReport degeneracy_field(const MdField& field, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw Error(errkind::parameter_out_of_range, "tau must lie in (0, 1)");
  DegeneracyReport rep;
  rep.tau = tau;
  rep.mask.assign(field.interior.size(), 0);
  const int D = field.directions;
  for (std::size_t node = 0; node < field.interior.size(); ++node) {
    if (!field.interior[node] || !field.converged[node]) continue;
    ++rep.converged;
    const double* md = field.md.data() + node * D;
    double lo = md[0], hi = md[0];
    for (int k = 1; k < D; ++k) {
      lo = std::min(lo, md[k]);
      hi = std::max(hi, md[k]);
    }
    if (hi <= 0.0 || lo < tau * hi) {
      rep.mask[node] = 1;
      ++rep.degenerate;
    }
  }
  rep.fraction = rep.converged == 0
                     ? 0.0
                     : static_cast<double>(rep.degenerate) / rep.converged;
  return rep;
}

// ---------------------------------------------------------------------------
// Discrete Stokes consistency.

struct StokesReport {
  double boundary_integral = 0.0;
  double area_integral = 0.0;
  double residual = 0.0;
  double h = 0.0;
  bool boundary_from_loop = false;  // exact attached loop vs extracted cycle
  std::uint64_t cells = 0;          // nodes contributing a Jacobian sample
};

// Compares the loop integral of (f, pi) around the boundary against the
// integrated Jacobian determinant of (f, pi) composed with the map. Central
// differences where both neighbors exist, one-sided on the mask rim.
inline StokesReport stokes_check(const SampledMap& map, const ScalarField& f,
                                 const ScalarField& pi) {
  if (f.values.size() != pi.values.size())
    throw Error(errkind::invalid_spec, "field sizes disagree");
  map.validate(static_cast<int>(f.values.size()));
  const Grid& g = map.grid;
  StokesReport rep;
  rep.h = g.h;

  auto fv = [&](int i, int j) { return f.values[map.at(i, j)]; };
  auto pv = [&](int i, int j) { return pi.values[map.at(i, j)]; };

  // d/dx with central/one-sided fallback; returns false when neither
  // neighbor exists.
  auto diff = [&](auto&& val, int i, int j, int di, int dj, double& out) {
    const bool fwd = g.in(i + di, j + dj), bwd = g.in(i - di, j - dj);
    if (fwd && bwd) {
      out = (val(i + di, j + dj) - val(i - di, j - dj)) / (2.0 * g.h);
      return true;
    }
    if (fwd) {
      out = (val(i + di, j + dj) - val(i, j)) / g.h;
      return true;
    }
    if (bwd) {
      out = (val(i, j) - val(i - di, j - dj)) / g.h;
      return true;
    }
    return false;
  };

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!g.in(i, j)) continue;
      double fx, fy, px, py;
      if (!diff(fv, i, j, 1, 0, fx) || !diff(fv, i, j, 0, 1, fy) ||
          !diff(pv, i, j, 1, 0, px) || !diff(pv, i, j, 0, 1, py))
        continue;
      rep.area_integral += (fx * py - fy * px) * g.h * g.h;
      ++rep.cells;
    }
  if (rep.cells == 0)
    throw Error(errkind::domain_too_small, "mask has no differentiable nodes");

  if (map.boundary) {
    rep.boundary_from_loop = true;
    // Trapezoid sum over the exact boundary loop with grouped cancellation.
    const auto& loop = *map.boundary;
    std::map<std::pair<int, int>, std::int64_t> net;
    for (int i = 0; i < loop.segments(); ++i) {
      const int a = loop.points[i], b = loop.points[i + 1];
      if (a == b) continue;
      if (a < b)
        ++net[{a, b}];
      else
        --net[{b, a}];
    }
    for (const auto& [seg, count] : net) {
      if (count == 0) continue;
      const auto [a, b] = seg;
      rep.boundary_integral += static_cast<double>(count) * 0.5 *
                               (f.values[a] + f.values[b]) *
                               (pi.values[b] - pi.values[a]);
    }
  } else {
    // Extract the rim (in-mask nodes missing an axis neighbor), order it by
    // angle around the mask centroid (valid for convex masks), and run the
    // trapezoid rule around the resulting polygon.
    double cx = 0.0, cy = 0.0;
    std::size_t count = 0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (g.in(i, j)) {
          const auto [x, y] = g.coord(i, j);
          cx += x;
          cy += y;
          ++count;
        }
    cx /= static_cast<double>(count);
    cy /= static_cast<double>(count);

    struct RimNode {
      double angle, radius;
      int i, j;
    };
    std::vector<RimNode> rim;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (!g.in(i, j)) continue;
        if (g.in(i + 1, j) && g.in(i - 1, j) && g.in(i, j + 1) && g.in(i, j - 1))
          continue;
        const auto [x, y] = g.coord(i, j);
        rim.push_back({std::atan2(y - cy, x - cx), std::hypot(x - cx, y - cy), i, j});
      }
    if (rim.size() < 3)
      throw Error(errkind::domain_too_small, "boundary cycle has fewer than 3 nodes");
    std::sort(rim.begin(), rim.end(), [](const RimNode& a, const RimNode& b) {
      if (a.angle != b.angle) return a.angle < b.angle;
      if (a.radius != b.radius) return a.radius < b.radius;
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t k = 0; k < rim.size(); ++k) {
      const auto& a = rim[k];
      const auto& b = rim[(k + 1) % rim.size()];
      rep.boundary_integral += 0.5 * (fv(a.i, a.j) + fv(b.i, b.j)) *
                               (pv(b.i, b.j) - pv(a.i, a.j));
    }
  }

  rep.residual = std::abs(rep.boundary_integral - rep.area_integral);
  return rep;
}

}  // namespace treelens
