#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "treelens/errors.hpp"
#include "treelens/parallel.hpp"

namespace treelens {

struct MetricViolation {
  std::string kind;   // one of the errkind metric axioms
  int i = -1, j = -1, k = -1;
  double slack = 0.0; // how badly the axiom fails (worst offender)

  std::string describe() const {
    std::ostringstream os;
    os << kind << " at (" << i << "," << j;
    if (k >= 0) os << "," << k;
    os << "), slack " << slack;
    return os.str();
  }
};

// Thrown by matrix validation; carries every violated axiom with its worst
// offending index tuple.
class MetricValidationError : public Error {
 public:
  explicit MetricValidationError(std::vector<MetricViolation> violations)
      : Error(violations.empty() ? errkind::internal_error : violations.front().kind,
              summarize(violations)),
        violations_(std::move(violations)) {}

  const std::vector<MetricViolation>& violations() const { return violations_; }

 private:
  static std::string summarize(const std::vector<MetricViolation>& vs) {
    std::ostringstream os;
    os << "metric validation failed:";
    for (const auto& v : vs) os << " [" << v.describe() << "]";
    return os.str();
  }

  std::vector<MetricViolation> violations_;
};

// A finite metric space: n points and a validated symmetric distance matrix.
// Immutable after construction and safe to share across threads. Lazily
// computed support structures (sorted neighbor orders, irreducible-jump
// adjacency, realized distance values) back the geodesic and lens machinery.
class FiniteMetricSpace {
 public:
  static FiniteMetricSpace from_matrix(std::vector<double> flat, int n,
                                       double tol_metric = 1e-9,
                                       std::vector<std::string> labels = {}) {
    auto violations = check_matrix(flat, n, tol_metric);
    if (!violations.empty()) throw MetricValidationError(std::move(violations));
    return FiniteMetricSpace(std::move(flat), n, tol_metric, std::move(labels));
  }

  static FiniteMetricSpace from_rows(const std::vector<std::vector<double>>& rows,
                                     double tol_metric = 1e-9,
                                     std::vector<std::string> labels = {}) {
    const int n = static_cast<int>(rows.size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * n);
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != n)
        throw Error(errkind::invalid_spec, "distance matrix is not square");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return from_matrix(std::move(flat), n, tol_metric, std::move(labels));
  }

  // For generators whose output is a metric by construction (norms, graph
  // shortest paths, rescalings). Skips the O(n^3) axiom scan.
  static FiniteMetricSpace trusted(std::vector<double> flat, int n,
                                   double tol_metric = 1e-9,
                                   std::vector<std::string> labels = {}) {
    return FiniteMetricSpace(std::move(flat), n, tol_metric, std::move(labels));
  }

  // Non-throwing axiom check; empty result means the matrix is a metric.
  static std::vector<MetricViolation> check_matrix(const std::vector<double>& flat,
                                                   int n, double tol_metric);

  int n() const { return n_; }
  double tol() const { return tol_; }
  double d(int i, int j) const { return dist_[idx(i, j)]; }
  std::span<const double> row(int i) const {
    return std::span<const double>(dist_.data() + static_cast<std::size_t>(i) * n_, n_);
  }
  const std::vector<double>& flat() const { return dist_; }
  const std::vector<std::string>& labels() const { return labels_; }

  double diameter() const { return basic().diameter; }

  // Sorted unique distance values over all pairs (includes 0).
  const std::vector<double>& realized_distances() const { return basic().realized; }

  // Sorted unique distance values from one point (includes 0).
  std::vector<double> realized_from(int i) const {
    auto r = row(i);
    std::vector<double> vals(r.begin(), r.end());
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals;
  }

  // Neighbor indices of z sorted by (distance, index); position 0 is z itself.
  std::span<const std::int32_t> sorted_neighbors(int z) const {
    const auto& s = order();
    return std::span<const std::int32_t>(
        s.order.data() + static_cast<std::size_t>(z) * n_, n_);
  }

  // True when no third point sits metrically between u and v; such jumps are
  // the discrete analogue of traversing a single edge.
  bool irreducible(int u, int v) const {
    return tight().tight[static_cast<std::size_t>(u) * n_ + v] != 0;
  }

  // Largest irreducible jump: the resolution quantum of the space. Continuum
  // bounds are checked up to one quantum on discrete spaces.
  double quantum() const { return tight().quantum; }

  FiniteMetricSpace rescaled(double sigma) const {
    std::vector<double> flat(dist_.size());
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = dist_[i] / sigma;
    return trusted(std::move(flat), n_, tol_ / sigma, labels_);
  }

 private:
  // Lazily built support tiers, cheapest first: Basic is O(n^2 log n), Order
  // is O(n^2 log n), Tight is O(n^3). Each is built at most once per space
  // (shared across copies) and only when an operation actually needs it.
  struct Basic {
    std::vector<double> realized;
    double diameter = 0.0;
  };
  struct Order {
    std::vector<std::int32_t> order;  // n*n, rows sorted by (dist, index)
  };
  struct Tight {
    std::vector<std::uint8_t> tight;  // n*n irreducible-jump adjacency
    double quantum = 0.0;
  };

  template <class T>
  struct Cell {
    std::once_flag once;
    std::unique_ptr<T> data;
  };

  FiniteMetricSpace(std::vector<double> flat, int n, double tol,
                    std::vector<std::string> labels)
      : n_(n), tol_(tol), dist_(std::move(flat)), labels_(std::move(labels)),
        basic_(std::make_shared<Cell<Basic>>()),
        order_(std::make_shared<Cell<Order>>()),
        tight_(std::make_shared<Cell<Tight>>()) {}

  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }

  const Basic& basic() const {
    std::call_once(basic_->once, [this] { basic_->data = build_basic(); });
    return *basic_->data;
  }
  const Order& order() const {
    std::call_once(order_->once, [this] { order_->data = build_order(); });
    return *order_->data;
  }
  const Tight& tight() const {
    std::call_once(tight_->once, [this] { tight_->data = build_tight(); });
    return *tight_->data;
  }

  std::unique_ptr<Basic> build_basic() const;
  std::unique_ptr<Order> build_order() const;
  std::unique_ptr<Tight> build_tight() const;

  int n_;
  double tol_;
  std::vector<double> dist_;
  std::vector<std::string> labels_;
  std::shared_ptr<Cell<Basic>> basic_;
  std::shared_ptr<Cell<Order>> order_;
  std::shared_ptr<Cell<Tight>> tight_;
};

inline std::vector<MetricViolation> FiniteMetricSpace::check_matrix(
    const std::vector<double>& flat, int n, double tol_metric) {
  std::vector<MetricViolation> out;
  if (n < 1 || flat.size() != static_cast<std::size_t>(n) * n) {
    out.push_back({errkind::invalid_spec, n, n, -1, 0.0});
    return out;
  }
  auto at = [&](int i, int j) { return flat[static_cast<std::size_t>(i) * n + j]; };

  MetricViolation worst_finite{errkind::nonfinite_entry, -1, -1, -1, 0.0};
  MetricViolation worst_negative{errkind::negative_entry, -1, -1, -1, 0.0};
  MetricViolation worst_diag{errkind::nonzero_diagonal, -1, -1, -1, 0.0};
  MetricViolation worst_sym{errkind::asymmetric_input, -1, -1, -1, 0.0};
  MetricViolation worst_tri{errkind::triangle_violation, -1, -1, -1, 0.0};

  for (int i = 0; i < n; ++i) {
    if (at(i, i) != 0.0) {
      const double s = std::abs(at(i, i));
      if (worst_diag.i < 0 || s > worst_diag.slack) worst_diag = {errkind::nonzero_diagonal, i, i, -1, s};
    }
    for (int j = 0; j < n; ++j) {
      const double v = at(i, j);
      if (!std::isfinite(v)) {
        if (worst_finite.i < 0) worst_finite = {errkind::nonfinite_entry, i, j, -1, 0.0};
        continue;
      }
      if (v < 0.0 && (worst_negative.i < 0 || -v > worst_negative.slack))
        worst_negative = {errkind::negative_entry, i, j, -1, -v};
      if (j > i && at(i, j) != at(j, i)) {
        const double s = std::abs(at(i, j) - at(j, i));
        if (worst_sym.i < 0 || s > worst_sym.slack)
          worst_sym = {errkind::asymmetric_input, i, j, -1, s};
      }
    }
  }

  // Triangle scan only makes sense on finite, symmetric-ish data.
  if (worst_finite.i < 0) {
    for (int i = 0; i < n; ++i) {
      for (int k = i + 1; k < n; ++k) {
        const double dik = at(i, k);
        for (int j = 0; j < n; ++j) {
          if (j == i || j == k) continue;
          const double excess = dik - (at(i, j) + at(j, k)) - tol_metric;
          if (excess > 0.0 && (worst_tri.i < 0 || excess > worst_tri.slack))
            worst_tri = {errkind::triangle_violation, i, k, j, excess};
        }
      }
    }
  }

  for (const auto& v : {worst_negative, worst_diag, worst_sym, worst_finite, worst_tri})
    if (v.i >= 0) out.push_back(v);
  return out;
}

inline std::unique_ptr<FiniteMetricSpace::Basic> FiniteMetricSpace::build_basic() const {
  auto s = std::make_unique<Basic>();
  s->realized = dist_;
  std::sort(s->realized.begin(), s->realized.end());
  s->realized.erase(std::unique(s->realized.begin(), s->realized.end()),
                    s->realized.end());
  s->diameter = s->realized.empty() ? 0.0 : s->realized.back();
  return s;
}

inline std::unique_ptr<FiniteMetricSpace::Order> FiniteMetricSpace::build_order() const {
  auto s = std::make_unique<Order>();
  const int n = n_;
  s->order.resize(static_cast<std::size_t>(n) * n);
  for_chunks(static_cast<std::size_t>(n), hardware_threads(), 16,
             [&](std::size_t b, std::size_t e, std::size_t) {
               for (std::size_t ui = b; ui < e; ++ui) {
                 const int u = static_cast<int>(ui);
                 auto* ord = s->order.data() + ui * n;
                 for (int j = 0; j < n; ++j) ord[j] = j;
                 std::sort(ord, ord + n, [&](int a, int bb) {
                   const double da = d(u, a), db = d(u, bb);
                   return da != db ? da < db : a < bb;
                 });
               }
             });
  return s;
}

inline std::unique_ptr<FiniteMetricSpace::Tight> FiniteMetricSpace::build_tight() const {
  auto s = std::make_unique<Tight>();
  const int n = n_;
  s->tight.assign(static_cast<std::size_t>(n) * n, 0);
  const double between_tol = 2.0 * tol_;
  std::vector<double> quantum_per_row(n, 0.0);

  for_chunks(static_cast<std::size_t>(n), hardware_threads(), 8,
             [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t ui = b; ui < e; ++ui) {
      const int u = static_cast<int>(ui);
      for (int v = 0; v < n; ++v) {
        if (v == u) continue;
        const double duv = d(u, v);
        bool tight = true;
        for (int w = 0; w < n; ++w) {
          if (w == u || w == v) continue;
          if (d(u, w) > tol_ && d(w, v) > tol_ &&
              d(u, w) + d(w, v) <= duv + between_tol) {
            tight = false;
            break;
          }
        }
        if (tight) {
          s->tight[ui * n + v] = 1;
          quantum_per_row[u] = std::max(quantum_per_row[u], duv);
        }
      }
    }
  });

  for (int u = 0; u < n; ++u)
    s->quantum = std::max(s->quantum, quantum_per_row[u]);
  return s;
}

// ---------------------------------------------------------------------------
// Weighted graphs as finite models of geodesic spaces.

struct GraphSpec {
  struct Edge {
    int u = 0, v = 0;
    double w = 1.0;
  };
  int vertex_count = 0;
  std::vector<Edge> edges;
};

inline void validate_graph(const GraphSpec& g) {
  if (g.vertex_count < 1)
    throw Error(errkind::invalid_spec, "graph needs at least one vertex");
  for (const auto& e : g.edges) {
    if (e.u < 0 || e.u >= g.vertex_count || e.v < 0 || e.v >= g.vertex_count)
      throw Error(errkind::invalid_spec, "edge endpoint out of range");
    if (e.u == e.v) throw Error(errkind::invalid_spec, "self-loops not allowed");
    if (!(e.w > 0.0) || !std::isfinite(e.w))
      throw Error(errkind::invalid_spec, "edge weights must be positive finite");
  }
}

// All-pairs shortest-path metric of a connected weighted graph. The upper
// triangle is mirrored so the result is exactly symmetric.
inline FiniteMetricSpace metric_from_graph(const GraphSpec& g,
                                           double tol_metric = 1e-9) {
  validate_graph(g);
  const int n = g.vertex_count;
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& e : g.edges) {
    adj[e.u].emplace_back(e.v, e.w);
    adj[e.v].emplace_back(e.u, e.w);
  }
  for (auto& a : adj)
    std::sort(a.begin(), a.end());

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> flat(static_cast<std::size_t>(n) * n, inf);

  std::vector<std::vector<double>> rows(n);
  for_chunks(static_cast<std::size_t>(n), hardware_threads(), 4,
             [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t si = b; si < e; ++si) {
      const int src = static_cast<int>(si);
      std::vector<double> dist(n, inf);
      dist[src] = 0.0;
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
      heap.emplace(0.0, src);
      while (!heap.empty()) {
        auto [dv, v] = heap.top();
        heap.pop();
        if (dv > dist[v]) continue;
        for (auto [u, w] : adj[v]) {
          const double cand = dv + w;
          if (cand < dist[u]) {
            dist[u] = cand;
            heap.emplace(cand, u);
          }
        }
      }
      rows[src] = std::move(dist);
    }
  });

  for (int i = 0; i < n; ++i) {
    if (rows[i][i] != 0.0) rows[i][i] = 0.0;
    for (int j = 0; j < n; ++j) {
      if (std::isinf(rows[i][j])) {
        std::ostringstream os;
        os << "vertices " << i << " and " << j << " are not connected";
        throw Error(errkind::disconnected_graph, os.str());
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = std::min(rows[i][j], rows[j][i]);
      flat[static_cast<std::size_t>(i) * n + j] = v;
      flat[static_cast<std::size_t>(j) * n + i] = v;
    }

  return FiniteMetricSpace::from_matrix(std::move(flat), n, tol_metric);
}

// ---------------------------------------------------------------------------
// Closed balls.

struct Ball {
  int center = 0;
  double radius = 0.0;
  double tau = 1e-9;  // closed-ball membership tolerance
};

inline bool ball_contains(const FiniteMetricSpace& space, const Ball& b, int p) {
  return space.d(b.center, p) <= b.radius + b.tau;
}

inline std::vector<int> ball_members(const FiniteMetricSpace& space, const Ball& b) {
  std::vector<int> out;
  for (int p = 0; p < space.n(); ++p)
    if (ball_contains(space, b, p)) out.push_back(p);
  return out;
}

inline double set_diameter(const FiniteMetricSpace& space, std::span<const int> pts) {
  if (pts.empty())
    throw Error(errkind::empty_set_diameter, "diameter of the empty set is undefined");
  double best = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      best = std::max(best, space.d(pts[a], pts[b]));
  return best;
}

// How badly approximate midpoints fail to exist: max over pairs (x,y) of the
// best achievable max(|d(x,m)-d/2|, |d(m,y)-d/2|) over candidate midpoints m.
// Zero (up to resolution) on graph metrics with even splits; large on
// snowflaked lines, which have no points between any two others.
inline double geodesicity_defect(const FiniteMetricSpace& space,
                                 int threads = hardware_threads()) {
  const int n = space.n();
  if (n < 2)
    throw Error(errkind::parameter_out_of_range, "need at least two points");
  struct Acc { double worst = 0.0; };
  auto acc = parallel_reduce<Acc>(
      static_cast<std::size_t>(n) * n, threads, 64,
      [] { return Acc{}; },
      [&](Acc& a, std::size_t pairidx) {
        const int x = static_cast<int>(pairidx / n);
        const int y = static_cast<int>(pairidx % n);
        if (x >= y) return;
        const double half = space.d(x, y) / 2.0;
        double best = std::numeric_limits<double>::infinity();
        for (int m = 0; m < n; ++m) {
          const double dev = std::max(std::abs(space.d(x, m) - half),
                                      std::abs(space.d(m, y) - half));
          best = std::min(best, dev);
        }
        a.worst = std::max(a.worst, best);
      },
      [](Acc& out, const Acc& in) { out.worst = std::max(out.worst, in.worst); });
  return acc.worst;
}

}  // namespace treelens
