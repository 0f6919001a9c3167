#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "treelens/geodesic.hpp"
#include "treelens/metric_space.hpp"
#include "treelens/rng.hpp"

namespace treelens {

// Tripod lengths of a triangle: the unique a_k >= 0 with
// d(x_k, x_l) = a_k + a_l. Rounding-level negatives are clamped; anything
// beyond tolerance indicates a broken metric.
inline std::array<double, 3> tripod_lengths(const FiniteMetricSpace& space,
                                            int x1, int x2, int x3) {
  const double d12 = space.d(x1, x2), d13 = space.d(x1, x3), d23 = space.d(x2, x3);
  std::array<double, 3> a{(d12 + d13 - d23) / 2.0, (d12 + d23 - d13) / 2.0,
                          (d13 + d23 - d12) / 2.0};
  for (auto& v : a) {
    if (v < 0.0) {
      if (-v > space.tol())
        throw Error(errkind::negative_tripod, "negative tripod length; metric violated");
      v = 0.0;
    }
  }
  return a;
}

enum class GeodesicMode { canonical, exhaustive };

struct ThinnessOptions {
  GeodesicMode mode = GeodesicMode::canonical;
  std::size_t enumeration_cap = 64;  // per vertex pair, exhaustive mode only
};

struct ThinnessWitness {
  std::array<int, 3> ordered_vertices{-1, -1, -1};  // (x_s1, x_s2, x_s3) for the worst permutation
  double t = 0.0;
  double distance = 0.0;
};

struct TriangleAnalysis {
  std::array<int, 3> vertices{0, 0, 0};
  std::array<DiscreteGeodesic, 3> edges;  // joining positions (0,1), (1,2), (0,2)
  std::array<double, 3> tripod{0.0, 0.0, 0.0};
  double thinness = 0.0;
  ThinnessWitness worst;
  double quantization = 0.0;  // 2 * largest arc gap over the edges used
  bool enumeration_truncated = false;
};

namespace detail {

// Edge slots by vertex positions: (0,1) -> 0, (1,2) -> 1, (0,2) -> 2.
inline int edge_index(int p, int q) {
  if (p > q) std::swap(p, q);
  if (p == 0 && q == 1) return 0;
  if (p == 1 && q == 2) return 1;
  return 2;
}

// Max over matched-parameter samples of d(A(t), B(t)), t in [0, limit].
// Samples are the vertex times of both chains plus the endpoints.
inline void thinness_against(const FiniteMetricSpace& space,
                             const DiscreteGeodesic& a, const DiscreteGeodesic& b,
                             double limit, double& best, double& best_t) {
  std::vector<double> ts;
  ts.reserve(a.arclen.size() + b.arclen.size() + 2);
  const double eps = 1e-9 * (1.0 + limit);
  for (double v : a.arclen)
    if (v <= limit + eps) ts.push_back(std::min(v, limit));
  for (double v : b.arclen)
    if (v <= limit + eps) ts.push_back(std::min(v, limit));
  ts.push_back(0.0);
  ts.push_back(limit);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  for (double t : ts) {
    const double dist = space.d(eval_geodesic(a, t), eval_geodesic(b, t));
    if (dist > best) {
      best = dist;
      best_t = t;
    }
  }
}

inline constexpr std::array<std::array<int, 3>, 6> kPermutations{
    {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

}  // namespace detail

// Thinness of one geodesic triangle: for every permutation s of the vertices,
// the two edges leaving x_{s1} are compared at matched arc times t in
// [0, a_{s1}]; edges traversed backwards use the reversal c(L - t).
inline TriangleAnalysis triangle_thinness(const FiniteMetricSpace& space, int x1,
                                          int x2, int x3,
                                          const ThinnessOptions& opts = {}) {
  TriangleAnalysis out;
  out.vertices = {x1, x2, x3};
  out.tripod = tripod_lengths(space, x1, x2, x3);

  std::array<std::vector<DiscreteGeodesic>, 3> choices;
  const std::array<std::pair<int, int>, 3> pairs{{{x1, x2}, {x2, x3}, {x1, x3}}};
  for (int e = 0; e < 3; ++e) {
    auto [p, q] = pairs[e];
    if (opts.mode == GeodesicMode::exhaustive) {
      if (!enumerate_geodesics(space, p, q, opts.enumeration_cap, choices[e]))
        out.enumeration_truncated = true;
    } else {
      choices[e].push_back(canonical_geodesic(space, p, q));
    }
    out.edges[e] = choices[e].front();
  }

  double quant = 0.0;
  for (const auto& set : choices)
    for (const auto& g : set) quant = std::max(quant, g.max_gap());
  out.quantization = 2.0 * quant;

  double best = -1.0;
  for (const auto& sigma : detail::kPermutations) {
    const double limit = out.tripod[sigma[0]];
    const int ea = detail::edge_index(sigma[0], sigma[1]);
    const int eb = detail::edge_index(sigma[0], sigma[2]);
    const bool rev_a = sigma[0] > sigma[1];
    const bool rev_b = sigma[0] > sigma[2];
    for (const auto& ga : choices[ea]) {
      const DiscreteGeodesic a = rev_a ? ga.reversed() : ga;
      for (const auto& gb : choices[eb]) {
        const DiscreteGeodesic b = rev_b ? gb.reversed() : gb;
        double local = -1.0, local_t = 0.0;
        detail::thinness_against(space, a, b, limit, local, local_t);
        if (local > best) {
          best = local;
          out.worst.ordered_vertices = {out.vertices[sigma[0]], out.vertices[sigma[1]],
                                        out.vertices[sigma[2]]};
          out.worst.t = local_t;
          out.worst.distance = local;
        }
      }
    }
  }
  out.thinness = std::max(best, 0.0);
  return out;
}

struct ThinnessReport {
  double delta = 0.0;             // max measured thinness (lower bound if sampled)
  TriangleAnalysis worst;
  bool exhaustive = true;         // all C(n,3) triangles visited
  std::uint64_t triangles_scanned = 0;
  std::uint64_t seed = 0;
  double quantization = 0.0;
  bool enumeration_truncated = false;
};

namespace detail {

// Triangle scan body shared by exhaustive and sampled modes. Triples must be
// sorted ascending so edge orientations are reproducible.
struct TriangleBest {
  double delta = -1.0;
  std::array<int, 3> triple{-1, -1, -1};
  double quant = 0.0;
  bool truncated = false;

  void consider(double d, const std::array<int, 3>& t, double q, bool trunc) {
    quant = std::max(quant, q);
    truncated = truncated || trunc;
    if (d > delta || triple[0] < 0) {
      delta = d;
      triple = t;
    } else if (d == delta && t < triple) {
      triple = t;
    }
  }

  void merge(const TriangleBest& o) {
    quant = std::max(quant, o.quant);
    truncated = truncated || o.truncated;
    if (o.triple[0] >= 0) consider(o.delta, o.triple, o.quant, o.truncated);
  }
};

}  // namespace detail

// Space-level thinness: exact max over all triangles when C(n,3) fits the
// budget, otherwise a seeded uniform sample (a lower bound for delta).
inline ThinnessReport space_thinness(const FiniteMetricSpace& space,
                                     std::uint64_t budget, std::uint64_t seed,
                                     const ThinnessOptions& opts = {},
                                     int threads = hardware_threads()) {
  if (budget < 1)
    throw Error(errkind::parameter_out_of_range, "budget must be at least 1");
  const int n = space.n();
  ThinnessReport rep;
  rep.seed = seed;
  if (n < 3) {
    rep.triangles_scanned = 0;
    rep.worst = n >= 1 ? triangle_thinness(space, 0, 0, 0, opts) : TriangleAnalysis{};
    return rep;
  }

  const std::uint64_t total =
      static_cast<std::uint64_t>(n) * (n - 1) * (n - 2) / 6;
  std::vector<std::array<int, 3>> samples;
  const bool exhaustive = total <= budget;
  if (!exhaustive) {
    Rng rng(seed);
    samples.reserve(budget);
    for (std::uint64_t s = 0; s < budget; ++s) {
      int a = static_cast<int>(rng.below(n));
      int b = static_cast<int>(rng.below(n - 1));
      if (b >= a) ++b;
      int c = static_cast<int>(rng.below(n - 2));
      for (int v : {std::min(a, b), std::max(a, b)})
        if (c >= v) ++c;
      std::array<int, 3> t{a, b, c};
      std::sort(t.begin(), t.end());
      samples.push_back(t);
    }
  }

  const std::size_t count = exhaustive ? static_cast<std::size_t>(total) : samples.size();
  auto triple_at = [&](std::size_t idx) -> std::array<int, 3> {
    if (!exhaustive) return samples[idx];
    // Unrank combination idx in colex-free ascending order.
    std::uint64_t r = idx;
    int i = 0;
    for (;; ++i) {
      const std::uint64_t block =
          static_cast<std::uint64_t>(n - 1 - i) * (n - 2 - i) / 2;
      if (r < block) break;
      r -= block;
    }
    int j = i + 1;
    for (;; ++j) {
      const std::uint64_t block = static_cast<std::uint64_t>(n - 1 - j);
      if (r < block) break;
      r -= block;
    }
    return {i, j, static_cast<int>(j + 1 + r)};
  };

  GeodesicTable table(space);
  const bool use_table = opts.mode == GeodesicMode::canonical;
  if (use_table) table.ensure_all(threads);

  auto best = parallel_reduce<detail::TriangleBest>(
      count, threads, 64, [] { return detail::TriangleBest{}; },
      [&](detail::TriangleBest& acc, std::size_t idx) {
        const auto t = triple_at(idx);
        if (use_table) {
          // Cheap path: measure with the memoized canonical edges.
          TriangleAnalysis an;
          an.vertices = t;
          an.tripod = tripod_lengths(space, t[0], t[1], t[2]);
          const std::array<const DiscreteGeodesic*, 3> edges{
              &table.get(t[0], t[1]), &table.get(t[1], t[2]), &table.get(t[0], t[2])};
          double quant = 0.0;
          for (auto* g : edges) quant = std::max(quant, g->max_gap());
          double delta = 0.0;
          for (const auto& sigma : detail::kPermutations) {
            const double limit = an.tripod[sigma[0]];
            const auto& ga = *edges[detail::edge_index(sigma[0], sigma[1])];
            const auto& gb = *edges[detail::edge_index(sigma[0], sigma[2])];
            const DiscreteGeodesic a = sigma[0] > sigma[1] ? ga.reversed() : ga;
            const DiscreteGeodesic b = sigma[0] > sigma[2] ? gb.reversed() : gb;
            double local = -1.0, local_t = 0.0;
            detail::thinness_against(space, a, b, limit, local, local_t);
            delta = std::max(delta, local);
          }
          acc.consider(std::max(delta, 0.0), t, 2.0 * quant, false);
        } else {
          const auto an = triangle_thinness(space, t[0], t[1], t[2], opts);
          acc.consider(an.thinness, t, an.quantization, an.enumeration_truncated);
        }
      },
      [](detail::TriangleBest& out, const detail::TriangleBest& in) { out.merge(in); });

  rep.delta = std::max(best.delta, 0.0);
  rep.exhaustive = exhaustive;
  rep.triangles_scanned = count;
  rep.quantization = best.quant;
  rep.enumeration_truncated = best.truncated;
  if (best.triple[0] >= 0)
    rep.worst = triangle_thinness(space, best.triple[0], best.triple[1],
                                  best.triple[2], opts);
  return rep;
}

struct FourPointReport {
  double delta = 0.0;
  std::array<int, 4> worst{-1, -1, -1, -1};
  bool exhaustive = true;
  std::uint64_t quadruples_scanned = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double four_point_defect(const FiniteMetricSpace& s, int a, int b, int c,
                                int d4) {
  const double s1 = s.d(a, b) + s.d(c, d4);
  const double s2 = s.d(a, c) + s.d(b, d4);
  const double s3 = s.d(a, d4) + s.d(b, c);
  double hi = s1, mid = s2;
  if (mid > hi) std::swap(hi, mid);
  if (s3 > hi) {
    mid = hi;
    hi = s3;
  } else if (s3 > mid) {
    mid = s3;
  }
  return (hi - mid) / 2.0;
}

struct QuadBest {
  double delta = -1.0;
  std::array<int, 4> quad{-1, -1, -1, -1};

  void consider(double d, const std::array<int, 4>& q) {
    if (d > delta || quad[0] < 0) {
      delta = d;
      quad = q;
    } else if (d == delta && q < quad) {
      quad = q;
    }
  }

  void merge(const QuadBest& o) {
    if (o.quad[0] >= 0) consider(o.delta, o.quad);
  }
};

}  // namespace detail

// Four-point hyperbolicity: half the gap between the two largest of the three
// opposite-pair distance sums, maximized over quadruples. Zero exactly on
// tree metrics; an independent cross-check for thin-triangle measurements.
inline FourPointReport four_point_delta(const FiniteMetricSpace& space,
                                        std::uint64_t budget, std::uint64_t seed,
                                        int threads = hardware_threads()) {
  const int n = space.n();
  FourPointReport rep;
  rep.seed = seed;
  if (n < 4) {
    rep.quadruples_scanned = 0;
    return rep;
  }
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2 *
                              (n - 2) / 3 * (n - 3) / 4;
  const bool exhaustive = total <= budget;
  rep.exhaustive = exhaustive;

  if (exhaustive) {
    // Parallel over the first index; inner triple loop stays cache-friendly.
    auto best = parallel_reduce<detail::QuadBest>(
        static_cast<std::size_t>(n), threads, 1,
        [] { return detail::QuadBest{}; },
        [&](detail::QuadBest& acc, std::size_t ai) {
          const int a = static_cast<int>(ai);
          for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c)
              for (int e = c + 1; e < n; ++e)
                acc.consider(detail::four_point_defect(space, a, b, c, e),
                             {a, b, c, e});
        },
        [](detail::QuadBest& out, const detail::QuadBest& in) { out.merge(in); });
    rep.delta = std::max(best.delta, 0.0);
    rep.worst = best.quad;
    rep.quadruples_scanned = total;
    return rep;
  }

  Rng rng(seed);
  std::vector<std::array<int, 4>> samples;
  samples.reserve(budget);
  for (std::uint64_t s = 0; s < budget; ++s) {
    std::array<int, 4> q{};
    // distinct indices by rejection; fine since n >= 4
    bool ok = false;
    while (!ok) {
      for (auto& v : q) v = static_cast<int>(rng.below(n));
      std::sort(q.begin(), q.end());
      ok = q[0] != q[1] && q[1] != q[2] && q[2] != q[3];
    }
    samples.push_back(q);
  }
  auto best = parallel_reduce<detail::QuadBest>(
      samples.size(), threads, 256, [] { return detail::QuadBest{}; },
      [&](detail::QuadBest& acc, std::size_t i) {
        const auto& q = samples[i];
        acc.consider(detail::four_point_defect(space, q[0], q[1], q[2], q[3]), q);
      },
      [](detail::QuadBest& out, const detail::QuadBest& in) { out.merge(in); });
  rep.delta = std::max(best.delta, 0.0);
  rep.worst = best.quad;
  rep.quadruples_scanned = samples.size();
  return rep;
}

struct TreeCertificate {
  bool is_tree = false;
  double delta4 = 0.0;
  std::array<int, 4> worst{-1, -1, -1, -1};
  double tol = 0.0;
};

// Tree certification via the exact four-point condition over all quadruples.
// Needs no geodesic choices, so the verdict is unambiguous.
inline TreeCertificate certify_tree(const FiniteMetricSpace& space, double tol = 1e-9,
                                    int threads = hardware_threads()) {
  auto fp = four_point_delta(space, std::numeric_limits<std::uint64_t>::max(), 0,
                             threads);
  TreeCertificate cert;
  cert.delta4 = fp.delta;
  cert.worst = fp.worst;
  cert.tol = tol;
  cert.is_tree = fp.delta <= tol;
  return cert;
}

}  // namespace treelens
