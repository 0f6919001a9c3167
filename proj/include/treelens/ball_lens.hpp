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
#include "treelens/rng.hpp"

namespace treelens {

inline std::vector<int> intersect_balls(const FiniteMetricSpace& space,
                                        const Ball& b1, const Ball& b2) {
  std::vector<int> out;
  for (int p = 0; p < space.n(); ++p)
    if (ball_contains(space, b1, p) && ball_contains(space, b2, p)) out.push_back(p);
  return out;
}

struct InnerBall {
  int center = -1;
  double radius = 0.0;
};

struct OuterBall {
  int center = -1;
  double radius = 0.0;
};

namespace detail {

inline std::vector<std::uint8_t> member_mask(const FiniteMetricSpace& space,
                                             std::span<const int> K) {
  std::vector<std::uint8_t> mask(space.n(), 0);
  for (int p : K) mask[p] = 1;
  return mask;
}

}  // namespace detail

// Largest closed ball (center and realized radius) contained in K. The radius
// is the largest value from the center's sorted distance list whose closed
// ball stays inside K; ties on the radius go to the smallest center index.
inline InnerBall best_inner_ball(const FiniteMetricSpace& space,
                                 std::span<const int> K, double tau = 1e-9) {
  if (K.empty())
    throw Error(errkind::empty_intersection, "inner ball of an empty set");
  const auto mask = detail::member_mask(space, K);
  InnerBall best;
  for (int z : K) {
    const auto order = space.sorted_neighbors(z);
    double exclusion = std::numeric_limits<double>::infinity();
    std::size_t prefix = order.size();
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (!mask[order[i]]) {
        exclusion = space.d(z, order[i]);
        prefix = i;
        break;
      }
    }
    // Largest realized value v with v + tau < exclusion; v exists since the
    // list starts at 0 (unless an excluded point sits within tau of z).
    double nu = -1.0;
    for (std::size_t i = prefix; i-- > 0;) {
      const double v = space.d(z, order[i]);
      if (v + tau < exclusion || std::isinf(exclusion)) {
        nu = v;
        break;
      }
    }
    if (nu < 0.0) continue;
    // K is ascending, so the first center reaching the max wins ties.
    if (best.center < 0 || nu > best.radius) {
      best.center = z;
      best.radius = nu;
    }
  }
  if (best.center < 0) {
    // Pathological (pseudometric twins); fall back to the smallest member.
    best.center = K.front();
    best.radius = 0.0;
  }
  return best;
}

// Smallest enclosing ball of K over all candidate centers; ties on the
// radius go to the smallest center index.
inline OuterBall best_outer_ball(const FiniteMetricSpace& space,
                                 std::span<const int> K) {
  if (K.empty())
    throw Error(errkind::empty_intersection, "outer ball of an empty set");
  OuterBall best;
  best.radius = std::numeric_limits<double>::infinity();
  for (int z = 0; z < space.n(); ++z) {
    double r = 0.0;
    for (int p : K) r = std::max(r, space.d(z, p));
    if (r < best.radius) {
      best.center = z;
      best.radius = r;
    }
  }
  return best;
}

// Supremal inner radius: max over z in K of the distance from z to the
// complement of K. Closed balls B(z, r) with r strictly below this value lie
// inside K, so it is the sharp inner radius value for sandwich statistics
// (the realized best_inner_ball radius undershoots it by one resolution step).
struct InnerSup {
  int center = -1;
  double radius = 0.0;
  bool whole_space = false;
};

inline InnerSup inner_radius_sup(const FiniteMetricSpace& space,
                                 std::span<const int> K) {
  if (K.empty())
    throw Error(errkind::empty_intersection, "inner radius of an empty set");
  const auto mask = detail::member_mask(space, K);
  InnerSup out;
  if (static_cast<int>(K.size()) == space.n()) {
    out.center = K.front();
    out.radius = space.diameter();
    out.whole_space = true;
    return out;
  }
  for (int z : K) {
    double excl = std::numeric_limits<double>::infinity();
    for (int q = 0; q < space.n(); ++q)
      if (!mask[q]) excl = std::min(excl, space.d(z, q));
    if (excl > out.radius || out.center < 0) {
      out.center = z;
      out.radius = excl;
    }
  }
  return out;
}

// Constructive witness for the lens of B(x,r) and B(y,s): the point z on the
// canonical x-y geodesic at arc (r-s+d)/2 with nu = (r+s-d)/2. The inner
// inclusion B(z, nu_effective) in K follows from the triangle inequality
// alone; outer_delta_needed measures the smallest enlargement covering K,
// which vanishes on tree metrics up to one resolution quantum.
struct HypWitness {
  int x = 0, y = 0;
  double r = 0.0, s = 0.0;
  bool swapped = false;     // inputs were given with r < s
  bool degenerate = false;  // r - s > d, so K equals B(y, s)
  int z = -1;
  double nu = 0.0;              // ideal inner radius (r+s-d)/2, clamped at 0
  double inner_margin = 0.0;    // min(nu, r - d(x,z), s - d(y,z)); negative when
                                // the placement error consumed the whole radius
  double nu_effective = 0.0;    // max(0, inner_margin)
  double placement_error = 0.0; // |d(x,z) - (r-s+d)/2|
  bool inner_ok = false;        // B(z, nu_effective) inside K (vacuous when the
                                // margin is negative: no ball is guaranteed)
  double outer_delta_needed = 0.0;
};

inline HypWitness hyp_distortion_witness(const FiniteMetricSpace& space, int x,
                                         double r, int y, double s,
                                         double tau = 1e-9,
                                         const DiscreteGeodesic* geo = nullptr) {
  HypWitness w;
  w.x = x;
  w.y = y;
  w.r = r;
  w.s = s;
  if (r < s) {
    std::swap(w.x, w.y);
    std::swap(w.r, w.s);
    w.swapped = true;
  }
  const double d = space.d(w.x, w.y);
  const auto K = intersect_balls(space, Ball{w.x, w.r, tau}, Ball{w.y, w.s, tau});
  if (K.empty())
    throw Error(errkind::empty_intersection, "balls do not intersect");

  if (w.r - w.s > d) {
    w.degenerate = true;
    w.z = w.y;
    w.nu = w.s;
    w.inner_margin = w.s;
    w.nu_effective = w.s;
  } else {
    const double target = std::clamp((w.r - w.s + d) / 2.0, 0.0, d);
    DiscreteGeodesic local;
    if (geo == nullptr) {
      local = canonical_geodesic(space, w.x, w.y);
      geo = &local;
    } else if (geo->source() != w.x || geo->target() != w.y) {
      local = (geo->source() == w.y && geo->target() == w.x)
                  ? geo->reversed()
                  : canonical_geodesic(space, w.x, w.y);
      geo = &local;
    }
    w.z = eval_geodesic(*geo, target);
    w.nu = std::max(0.0, (w.r + w.s - d) / 2.0);
    w.placement_error = std::abs(space.d(w.x, w.z) - target);
    w.inner_margin =
        std::min({w.nu, w.r - space.d(w.x, w.z), w.s - space.d(w.y, w.z)});
    w.nu_effective = std::max(0.0, w.inner_margin);
  }

  const auto mask = detail::member_mask(space, K);
  if (w.inner_margin < 0.0) {
    w.inner_ok = true;  // the quantum consumed the radius; nothing to include
  } else {
    const auto inner = ball_members(space, Ball{w.z, w.nu_effective, tau});
    w.inner_ok = std::all_of(inner.begin(), inner.end(),
                             [&](int p) { return mask[p] != 0; });
  }
  double reach = 0.0;
  for (int p : K) reach = std::max(reach, space.d(w.z, p));
  w.outer_delta_needed = std::max(0.0, reach - w.nu);
  return w;
}

// One ball pair fully analyzed: the lens K, its best realized inner ball,
// its best enclosing ball, the supremal inner radius, and the derived
// multiplicative/additive distortion statistics.
struct LensReport {
  int x = 0, y = 0;
  double r = 0.0, s = 0.0;
  std::vector<int> members;
  InnerBall inner;
  OuterBall outer;
  InnerSup sup;
  double lambda_mult = 1.0;
  double gap_add = 0.0;
  bool inner_exceeds_outer = false;  // realized inner radius above covering radius
  std::optional<HypWitness> witness;
};

inline LensReport make_lens_report(const FiniteMetricSpace& space, int x, double r,
                                   int y, double s, std::vector<int> members,
                                   bool with_witness, double tau = 1e-9,
                                   const DiscreteGeodesic* geo = nullptr) {
  LensReport rep;
  rep.x = x;
  rep.y = y;
  rep.r = r;
  rep.s = s;
  rep.members = std::move(members);
  if (rep.members.empty())
    throw Error(errkind::empty_intersection, "lens report of an empty set");
  rep.inner = best_inner_ball(space, rep.members, tau);
  rep.outer = best_outer_ball(space, rep.members);
  rep.sup = inner_radius_sup(space, rep.members);

  if (rep.outer.radius <= 0.0) {
    rep.lambda_mult = 1.0;  // single point (or metric twins): 0/0 reads as 1
    rep.gap_add = 0.0;
  } else if (rep.sup.radius <= 0.0) {
    rep.lambda_mult = std::numeric_limits<double>::infinity();
    rep.gap_add = rep.outer.radius;
  } else {
    rep.lambda_mult = std::max(1.0, rep.outer.radius / rep.sup.radius);
    rep.gap_add = std::max(0.0, rep.outer.radius - rep.sup.radius);
  }
  rep.inner_exceeds_outer = rep.inner.radius > rep.outer.radius;

  // Inclusion checks by enumeration; failures here are construction bugs.
  const auto mask = detail::member_mask(space, rep.members);
  for (int p : ball_members(space, Ball{rep.inner.center, rep.inner.radius, tau}))
    if (!mask[p])
      throw Error(errkind::internal_error, "inner ball escapes the lens");
  for (int p : rep.members)
    if (space.d(rep.outer.center, p) > rep.outer.radius + tau)
      throw Error(errkind::internal_error, "outer ball misses a lens member");

  if (with_witness)
    rep.witness = hyp_distortion_witness(space, x, r, y, s, tau, geo);
  return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive / sampled scans over ball pairs.

struct ScanConfig {
  std::vector<double> radius_grid;  // empty: auto (realized distances)
  std::uint64_t pair_budget = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t seed = 0;
  bool restrict_far = true;  // keep only max(r, s) < d(x, y)
  bool with_witness = true;
  double tau_ball = 1e-9;
  int threads = 0;  // 0: hardware default
};

struct LensKey {
  int x = -1, y = -1;
  double r = 0.0, s = 0.0;

  bool valid() const { return x >= 0; }
  friend bool operator<(const LensKey& a, const LensKey& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    if (a.r != b.r) return a.r < b.r;
    return a.s < b.s;
  }
};

struct DistortionProfile {
  std::uint64_t pairs_total = 0;
  std::uint64_t pairs_scanned = 0;
  std::uint64_t lenses_evaluated = 0;
  std::uint64_t empty_skipped = 0;
  bool sampled = false;
  std::uint64_t seed = 0;
  double scale = 1.0;
  double quantum = 0.0;

  double sup_lambda_mult = 1.0;
  LensKey lambda_witness;
  std::optional<LensReport> lambda_report;

  double sup_gap_add = 0.0;
  LensKey gap_witness;
  std::optional<LensReport> gap_report;

  // (inner nu*, outer R*) frequency table over all evaluated lenses.
  std::map<std::pair<double, double>, std::uint64_t> histogram;

  std::uint64_t witness_checked = 0;
  std::uint64_t witness_inner_failures = 0;
  double witness_max_outer_delta = 0.0;
  double witness_max_placement_error = 0.0;
  std::uint64_t inner_exceeds_outer_count = 0;
};

namespace detail {

struct ScanAccumulator {
  DistortionProfile profile;

  void absorb(const LensReport& rep) {
    auto& p = profile;
    ++p.lenses_evaluated;
    ++p.histogram[{rep.inner.radius, rep.outer.radius}];
    const LensKey key{rep.x, rep.y, rep.r, rep.s};
    if (rep.lambda_mult > p.sup_lambda_mult ||
        (rep.lambda_mult == p.sup_lambda_mult &&
         (!p.lambda_witness.valid() || key < p.lambda_witness))) {
      p.sup_lambda_mult = rep.lambda_mult;
      p.lambda_witness = key;
      p.lambda_report = rep;
    }
    if (rep.gap_add > p.sup_gap_add ||
        (rep.gap_add == p.sup_gap_add &&
         (!p.gap_witness.valid() || key < p.gap_witness))) {
      p.sup_gap_add = rep.gap_add;
      p.gap_witness = key;
      p.gap_report = rep;
    }
    if (rep.inner_exceeds_outer) ++p.inner_exceeds_outer_count;
    if (rep.witness) {
      ++p.witness_checked;
      if (!rep.witness->inner_ok) ++p.witness_inner_failures;
      p.witness_max_outer_delta =
          std::max(p.witness_max_outer_delta, rep.witness->outer_delta_needed);
      p.witness_max_placement_error =
          std::max(p.witness_max_placement_error, rep.witness->placement_error);
    }
  }

  void merge(const ScanAccumulator& o) {
    auto& p = profile;
    const auto& q = o.profile;
    p.pairs_scanned += q.pairs_scanned;
    p.lenses_evaluated += q.lenses_evaluated;
    p.empty_skipped += q.empty_skipped;
    for (const auto& [k, v] : q.histogram) p.histogram[k] += v;
    if (q.lambda_witness.valid() &&
        (q.sup_lambda_mult > p.sup_lambda_mult ||
         (q.sup_lambda_mult == p.sup_lambda_mult &&
          (!p.lambda_witness.valid() || q.lambda_witness < p.lambda_witness)))) {
      p.sup_lambda_mult = q.sup_lambda_mult;
      p.lambda_witness = q.lambda_witness;
      p.lambda_report = q.lambda_report;
    }
    if (q.gap_witness.valid() &&
        (q.sup_gap_add > p.sup_gap_add ||
         (q.sup_gap_add == p.sup_gap_add &&
          (!p.gap_witness.valid() || q.gap_witness < p.gap_witness)))) {
      p.sup_gap_add = q.sup_gap_add;
      p.gap_witness = q.gap_witness;
      p.gap_report = q.gap_report;
    }
    p.witness_checked += q.witness_checked;
    p.witness_inner_failures += q.witness_inner_failures;
    p.witness_max_outer_delta =
        std::max(p.witness_max_outer_delta, q.witness_max_outer_delta);
    p.witness_max_placement_error =
        std::max(p.witness_max_placement_error, q.witness_max_placement_error);
    p.inner_exceeds_outer_count += q.inner_exceeds_outer_count;
  }
};

// Per-ball candidate radii: grid values snapped down to the center's realized
// distances (closed balls only change membership at realized radii).
inline std::vector<double> snapped_radii(const std::vector<double>& row_values,
                                         const std::vector<double>& grid,
                                         double tau) {
  if (grid.empty()) return row_values;
  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid) {
    auto it = std::upper_bound(row_values.begin(), row_values.end(), g + tau);
    if (it == row_values.begin()) continue;
    out.push_back(*std::prev(it));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Scans ball pairs B(x,r), B(y,s) over the radius grid and aggregates the
// distortion statistics of their lenses. Auto grid uses every realized
// distance; pairs beyond pair_budget are sampled with the recorded seed.
// Deterministic for fixed (space, config, seed) at any thread count.
inline DistortionProfile diamond_scan(const FiniteMetricSpace& space,
                                      const ScanConfig& cfg = {}) {
  const int n = space.n();
  const int threads = cfg.threads > 0 ? cfg.threads : hardware_threads();
  const std::uint64_t all_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;

  std::vector<std::pair<int, int>> pairs;
  const bool sampled = all_pairs > cfg.pair_budget;
  if (!sampled) {
    pairs.reserve(all_pairs);
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y) pairs.emplace_back(x, y);
  } else {
    Rng rng(cfg.seed);
    for (auto rank : rng.distinct_sorted(all_pairs, cfg.pair_budget)) {
      // unrank pair (x, y), x < y, in row-major order
      std::uint64_t r = rank;
      int x = 0;
      while (r >= static_cast<std::uint64_t>(n - 1 - x)) {
        r -= n - 1 - x;
        ++x;
      }
      pairs.emplace_back(x, static_cast<int>(r) + x + 1);
    }
  }

  std::vector<std::vector<double>> row_values(n);
  for (int i = 0; i < n; ++i) row_values[i] = space.realized_from(i);

  auto acc = parallel_reduce<detail::ScanAccumulator>(
      pairs.size(), threads, 4, [] { return detail::ScanAccumulator{}; },
      [&](detail::ScanAccumulator& a, std::size_t pi) {
        const auto [x, y] = pairs[pi];
        ++a.profile.pairs_scanned;
        const double d = space.d(x, y);
        auto rx = detail::snapped_radii(row_values[x], cfg.radius_grid, cfg.tau_ball);
        auto ry = detail::snapped_radii(row_values[y], cfg.radius_grid, cfg.tau_ball);
        if (cfg.restrict_far) {
          auto cut = [&](std::vector<double>& v) {
            v.erase(std::lower_bound(v.begin(), v.end(), d), v.end());
          };
          cut(rx);
          cut(ry);
        }
        DiscreteGeodesic geo;
        bool have_geo = false;
        for (double r : rx) {
          for (double s : ry) {
            if (r + s < d - 2.0 * cfg.tau_ball) {
              ++a.profile.empty_skipped;  // provably empty by the triangle inequality
              continue;
            }
            auto members = intersect_balls(space, Ball{x, r, cfg.tau_ball},
                                           Ball{y, s, cfg.tau_ball});
            if (members.empty()) {
              ++a.profile.empty_skipped;
              continue;
            }
            if (cfg.with_witness && !have_geo) {
              geo = canonical_geodesic(space, x, y);
              have_geo = true;
            }
            a.absorb(make_lens_report(space, x, r, y, s, std::move(members),
                                      cfg.with_witness, cfg.tau_ball,
                                      have_geo ? &geo : nullptr));
          }
        }
      },
      [](detail::ScanAccumulator& out, const detail::ScanAccumulator& in) {
        out.merge(in);
      });

  acc.profile.pairs_total = all_pairs;
  acc.profile.sampled = sampled;
  acc.profile.seed = cfg.seed;
  acc.profile.quantum = space.quantum();
  return acc.profile;
}

// ---------------------------------------------------------------------------
// Pointwise diameter bounds.

struct DiameterCheck {
  double diam = 0.0;
  double bound = 0.0;
  double allowance = 0.0;  // one resolution quantum
  bool pass = true;
  bool empty = false;
  std::vector<int> members;
};

// The set A = B(x, t r + h) and B(y, (1-t) r + h) with r = d(x,y) has
// diameter at most 4*lambda*h in spaces whose lenses are near-balls; the
// check reports the measured diameter against that bound.
inline DiameterCheck lens_diameter_check(const FiniteMetricSpace& space, int x,
                                         int y, double t, double h, double lambda,
                                         double tau = 1e-9) {
  if (x == y)
    throw Error(errkind::parameter_out_of_range, "x and y must differ");
  if (!(t > 0.0 && t < 1.0))
    throw Error(errkind::parameter_out_of_range, "t must lie in (0, 1)");
  const double r = space.d(x, y);
  if (!(h >= 0.0) || h >= std::max(t, 1.0 - t) * r)
    throw Error(errkind::parameter_out_of_range,
                "h must satisfy 0 <= h < max(t, 1-t) * d(x, y)");
  DiameterCheck out;
  out.members = intersect_balls(space, Ball{x, t * r + h, tau},
                                Ball{y, (1.0 - t) * r + h, tau});
  out.bound = 4.0 * lambda * h;
  out.allowance = space.quantum();
  if (out.members.empty()) {
    out.empty = true;  // no vertex near c(t); vacuous at this resolution
    return out;
  }
  out.diam = set_diameter(space, out.members);
  out.pass = out.diam <= out.bound + out.allowance + tau;
  return out;
}

// Alternate hypothesis: diam(B(x,r) and B(x',r')) <= 2*lambda*(r + r' - d)
// for far-apart centers (the second radius plays the role of s).
inline DiameterCheck alt_hypothesis_check(const FiniteMetricSpace& space, int x,
                                          double r, int xp, double rp,
                                          double lambda, double tau = 1e-9) {
  const double d = space.d(x, xp);
  if (std::max(r, rp) >= d)
    throw Error(errkind::parameter_out_of_range,
                "requires max(r, r') < d(x, x')");
  DiameterCheck out;
  out.members = intersect_balls(space, Ball{x, r, tau}, Ball{xp, rp, tau});
  if (out.members.empty())
    throw Error(errkind::empty_intersection, "balls do not intersect");
  out.diam = set_diameter(space, out.members);
  out.bound = 2.0 * lambda * (r + rp - d);
  out.allowance = space.quantum();
  out.pass = out.diam <= out.bound + out.allowance + tau;
  return out;
}

// Distortion profiles of the same space under metric rescaling d/sigma.
// Additive statistics shrink like 1/sigma; multiplicative ones are invariant.
inline std::vector<std::pair<double, DistortionProfile>> rescale_sweep(
    const FiniteMetricSpace& space, const std::vector<double>& scales,
    ScanConfig cfg = {}) {
  if (scales.empty())
    throw Error(errkind::parameter_out_of_range, "no scales given");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0))
      throw Error(errkind::parameter_out_of_range, "scales must be positive");
    if (i > 0 && scales[i] <= scales[i - 1])
      throw Error(errkind::parameter_out_of_range, "scales must be ascending");
  }
  std::vector<std::pair<double, DistortionProfile>> out;
  out.reserve(scales.size());
  for (double sigma : scales) {
    auto scaled = space.rescaled(sigma);
    ScanConfig local = cfg;
    local.tau_ball = cfg.tau_ball / sigma;
    for (double& g : local.radius_grid) g /= sigma;
    auto profile = diamond_scan(scaled, local);
    profile.scale = sigma;
    out.emplace_back(sigma, std::move(profile));
  }
  return out;
}

}  // namespace treelens
