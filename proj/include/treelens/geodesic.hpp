#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "treelens/metric_space.hpp"

namespace treelens {

// A shortest chain p_0..p_m with cumulative arc lengths; stands in for an
// arc-length parameterized geodesic. On spaces without enough intermediate
// points (snowflakes, generic matrices) the chain may jump far in one step;
// the largest such jump is reported as max_gap().
struct DiscreteGeodesic {
  std::vector<int> points;
  std::vector<double> arclen;

  int size() const { return static_cast<int>(points.size()); }
  double length() const { return arclen.empty() ? 0.0 : arclen.back(); }
  int source() const { return points.front(); }
  int target() const { return points.back(); }

  double max_gap() const {
    double g = 0.0;
    for (std::size_t i = 1; i < arclen.size(); ++i)
      g = std::max(g, arclen[i] - arclen[i - 1]);
    return g;
  }

  DiscreteGeodesic reversed() const {
    DiscreteGeodesic r;
    const double total = length();
    r.points.assign(points.rbegin(), points.rend());
    r.arclen.resize(arclen.size());
    for (std::size_t i = 0; i < arclen.size(); ++i)
      r.arclen[i] = total - arclen[arclen.size() - 1 - i];
    if (!r.arclen.empty()) r.arclen.front() = 0.0;
    return r;
  }
};

// Nearest-vertex evaluation: the point whose arc time is closest to t,
// ties to the smaller position index.
inline int eval_geodesic(const DiscreteGeodesic& geo, double t) {
  const double slack = 1e-9 * (1.0 + geo.length());
  if (t < -slack || t > geo.length() + slack)
    throw Error(errkind::parameter_out_of_range, "geodesic parameter out of range");
  t = std::clamp(t, 0.0, geo.length());
  // arclen is nondecreasing; find the nearest sample.
  const auto it = std::lower_bound(geo.arclen.begin(), geo.arclen.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - geo.arclen.begin());
  if (hi >= geo.arclen.size()) hi = geo.arclen.size() - 1;
  if (hi == 0) return geo.points[0];
  const std::size_t lo = hi - 1;
  const double dlo = t - geo.arclen[lo], dhi = geo.arclen[hi] - t;
  return dlo <= dhi ? geo.points[lo] : geo.points[hi];
}

namespace detail {

// Feasible continuations u from cur on a tight chain x -> y: the jump must be
// irreducible, advance strictly, and keep both splits of the distance exact.
inline bool geodesic_step_ok(const FiniteMetricSpace& s, int x, int y, int cur,
                             int u, double eq_tol) {
  if (u == cur) return false;
  const double jump = s.d(cur, u);
  if (jump <= s.tol()) return false;
  if (!s.irreducible(cur, u)) return false;
  if (std::abs(s.d(x, cur) + jump - s.d(x, u)) > eq_tol) return false;
  if (std::abs(s.d(x, u) + s.d(u, y) - s.d(x, y)) > eq_tol) return false;
  return true;
}

inline double geodesic_eq_tol(const FiniteMetricSpace& s) {
  return 2.0 * s.tol();
}

}  // namespace detail

// Canonical geodesic from x to y: the lexicographically smallest shortest
// vertex chain whose jumps are all irreducible. Greedy construction: from the
// current vertex take the smallest-index feasible continuation; any feasible
// prefix extends to y, so the greedy chain is the lexicographic minimum.
inline DiscreteGeodesic canonical_geodesic(const FiniteMetricSpace& space, int x, int y) {
  const int n = space.n();
  if (x < 0 || x >= n || y < 0 || y >= n)
    throw Error(errkind::parameter_out_of_range, "vertex index out of range");

  DiscreteGeodesic geo;
  geo.points.push_back(x);
  geo.arclen.push_back(0.0);
  if (x == y) return geo;

  const double eq_tol = detail::geodesic_eq_tol(space);
  int cur = x;
  double s = 0.0;
  for (int step = 0; step <= n; ++step) {
    if (cur == y) return geo;
    int next = -1;
    for (int u = 0; u < n; ++u) {
      if (detail::geodesic_step_ok(space, x, y, cur, u, eq_tol)) {
        next = u;
        break;
      }
    }
    if (next < 0) {
      std::ostringstream os;
      os << "no geodesic continuation from " << cur << " toward " << y
         << " (zero-distance pair or tolerance too small)";
      throw Error(errkind::internal_error, os.str());
    }
    s += space.d(cur, next);
    cur = next;
    geo.points.push_back(cur);
    geo.arclen.push_back(s);
  }
  throw Error(errkind::internal_error, "geodesic construction did not terminate");
}

// All irreducible shortest chains from x to y in lexicographic order, up to
// `cap` of them. Returns true when complete, false when truncated at cap.
inline bool enumerate_geodesics(const FiniteMetricSpace& space, int x, int y,
                                std::size_t cap, std::vector<DiscreteGeodesic>& out) {
  out.clear();
  if (cap == 0) return false;
  const double eq_tol = detail::geodesic_eq_tol(space);
  DiscreteGeodesic cur;
  cur.points.push_back(x);
  cur.arclen.push_back(0.0);

  bool complete = true;
  // Iterative DFS; frame i holds the next candidate vertex to try from
  // position i of the chain.
  std::vector<int> candidate{0};
  while (!candidate.empty()) {
    const int depth = static_cast<int>(candidate.size()) - 1;
    const int at = cur.points[depth];
    if (at == y) {
      if (out.size() == cap) {
        complete = false;
        break;
      }
      out.push_back(cur);
      candidate.pop_back();
      cur.points.pop_back();
      cur.arclen.pop_back();
      continue;
    }
    int u = candidate.back();
    for (; u < space.n(); ++u)
      if (detail::geodesic_step_ok(space, x, y, at, u, eq_tol)) break;
    if (u >= space.n()) {
      candidate.pop_back();
      cur.points.pop_back();
      cur.arclen.pop_back();
      continue;
    }
    candidate.back() = u + 1;
    cur.points.push_back(u);
    cur.arclen.push_back(cur.arclen[depth] + space.d(at, u));
    candidate.push_back(0);
  }
  return complete;
}

// Memoized canonical geodesics for all ordered pairs i<j. Build once, then
// read-only access is safe from any number of threads.
class GeodesicTable {
 public:
  explicit GeodesicTable(const FiniteMetricSpace& space) : space_(&space) {}

  void ensure_all(int threads = hardware_threads()) {
    if (built_) return;
    const int n = space_->n();
    table_.resize(static_cast<std::size_t>(n) * (n - 1) / 2);
    for_chunks(table_.size(), threads, 32,
               [&](std::size_t b, std::size_t e, std::size_t) {
                 for (std::size_t t = b; t < e; ++t) {
                   auto [i, j] = unrank(t);
                   table_[t] = canonical_geodesic(*space_, i, j);
                 }
               });
    built_ = true;
  }

  // Requires i < j and ensure_all() done.
  const DiscreteGeodesic& get(int i, int j) const { return table_[rank(i, j)]; }

  const FiniteMetricSpace& space() const { return *space_; }

 private:
  std::size_t rank(int i, int j) const {
    const std::size_t n = static_cast<std::size_t>(space_->n());
    return static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i + 1) / 2 +
           (j - i - 1);
  }

  std::pair<int, int> unrank(std::size_t t) const {
    const int n = space_->n();
    int i = 0;
    std::size_t skip = 0;
    while (skip + static_cast<std::size_t>(n - i - 1) <= t) {
      skip += n - i - 1;
      ++i;
    }
    return {i, static_cast<int>(t - skip) + i + 1};
  }

  const FiniteMetricSpace* space_;
  std::vector<DiscreteGeodesic> table_;
  bool built_ = false;
};

// Verifies the defining property d(p_i, p_j) = s_j - s_i for all i < j,
// within per-step tolerance. Used by tests and report sanity checks.
inline double geodesic_defect(const FiniteMetricSpace& space, const DiscreteGeodesic& g) {
  double worst = 0.0;
  for (int i = 0; i < g.size(); ++i)
    for (int j = i + 1; j < g.size(); ++j)
      worst = std::max(worst, std::abs(space.d(g.points[i], g.points[j]) -
                                       (g.arclen[j] - g.arclen[i])));
  return worst;
}

}  // namespace treelens
