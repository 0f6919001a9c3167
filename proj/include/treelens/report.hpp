#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "treelens/ball_lens.hpp"
#include "treelens/gallery.hpp"
#include "treelens/hyperbolicity.hpp"
#include "treelens/lipschitz.hpp"
#include "treelens/metric_space.hpp"
#include "treelens/version.hpp"

namespace treelens {

using ordered_json = nlohmann::ordered_json;

inline ordered_json json_number(double v) {
  // nlohmann serializes non-finite doubles as null; make them explicit.
  if (std::isinf(v)) return v > 0 ? "infinity" : "-infinity";
  if (std::isnan(v)) return "nan";
  return v;
}

inline ordered_json to_json(const MetricViolation& v) {
  ordered_json j;
  j["kind"] = v.kind;
  j["i"] = v.i;
  j["j"] = v.j;
  if (v.k >= 0) j["k"] = v.k;
  j["slack"] = v.slack;
  return j;
}

inline ordered_json to_json(const TriangleAnalysis& a) {
  ordered_json j;
  j["vertices"] = a.vertices;
  j["tripod"] = a.tripod;
  j["thinness"] = a.thinness;
  ordered_json w;
  w["ordered_vertices"] = a.worst.ordered_vertices;
  w["t"] = a.worst.t;
  w["distance"] = a.worst.distance;
  j["worst_witness"] = w;
  j["quantization"] = a.quantization;
  if (a.enumeration_truncated) j["enumeration_truncated"] = true;
  return j;
}

inline ordered_json to_json(const ThinnessReport& r) {
  ordered_json j;
  j["delta"] = r.delta;
  j["exhaustive"] = r.exhaustive;
  j["triangles_scanned"] = r.triangles_scanned;
  j["seed"] = r.seed;
  j["quantization"] = r.quantization;
  j["enumeration_truncated"] = r.enumeration_truncated;
  j["worst_triangle"] = to_json(r.worst);
  return j;
}

inline ordered_json to_json(const FourPointReport& r) {
  ordered_json j;
  j["delta4"] = r.delta;
  j["worst_quadruple"] = r.worst;
  j["exhaustive"] = r.exhaustive;
  j["quadruples_scanned"] = r.quadruples_scanned;
  j["seed"] = r.seed;
  return j;
}

inline ordered_json to_json(const TreeCertificate& c) {
  ordered_json j;
  j["is_tree"] = c.is_tree;
  j["delta4"] = c.delta4;
  j["tol"] = c.tol;
  j["worst_quadruple"] = c.worst;
  return j;
}

inline ordered_json to_json(const HypWitness& w) {
  ordered_json j;
  j["x"] = w.x;
  j["y"] = w.y;
  j["r"] = w.r;
  j["s"] = w.s;
  j["swapped"] = w.swapped;
  j["degenerate"] = w.degenerate;
  j["z"] = w.z;
  j["nu"] = w.nu;
  j["inner_margin"] = w.inner_margin;
  j["nu_effective"] = w.nu_effective;
  j["placement_error"] = w.placement_error;
  j["inner_ok"] = w.inner_ok;
  j["outer_delta_needed"] = w.outer_delta_needed;
  return j;
}

inline ordered_json to_json(const LensReport& r) {
  ordered_json j;
  j["x"] = r.x;
  j["y"] = r.y;
  j["r"] = r.r;
  j["s"] = r.s;
  j["size"] = r.members.size();
  j["members"] = r.members;
  j["inner"] = {{"center", r.inner.center}, {"radius", r.inner.radius}};
  j["outer"] = {{"center", r.outer.center}, {"radius", r.outer.radius}};
  j["inner_sup"] = {{"center", r.sup.center},
                    {"radius", r.sup.radius},
                    {"whole_space", r.sup.whole_space}};
  j["lambda_mult"] = json_number(r.lambda_mult);
  j["gap_add"] = r.gap_add;
  j["inner_exceeds_outer"] = r.inner_exceeds_outer;
  if (r.witness) j["witness"] = to_json(*r.witness);
  return j;
}

inline ordered_json to_json(const LensKey& k) {
  ordered_json j;
  j["x"] = k.x;
  j["y"] = k.y;
  j["r"] = k.r;
  j["s"] = k.s;
  return j;
}

inline ordered_json to_json(const DistortionProfile& p) {
  ordered_json j;
  j["pairs_total"] = p.pairs_total;
  j["pairs_scanned"] = p.pairs_scanned;
  j["lenses_evaluated"] = p.lenses_evaluated;
  j["empty_skipped"] = p.empty_skipped;
  j["sampled"] = p.sampled;
  j["seed"] = p.seed;
  j["scale"] = p.scale;
  j["quantum"] = p.quantum;
  j["sup_lambda_mult"] = json_number(p.sup_lambda_mult);
  if (p.lambda_witness.valid()) {
    j["lambda_witness"] = to_json(p.lambda_witness);
    j["lambda_report"] = to_json(*p.lambda_report);
  }
  j["sup_gap_add"] = p.sup_gap_add;
  if (p.gap_witness.valid()) {
    j["gap_witness"] = to_json(p.gap_witness);
    j["gap_report"] = to_json(*p.gap_report);
  }
  ordered_json hist = ordered_json::array();
  for (const auto& [key, count] : p.histogram)
    hist.push_back({key.first, key.second, count});
  j["histogram_nu_R_count"] = hist;
  j["witness_checked"] = p.witness_checked;
  j["witness_inner_failures"] = p.witness_inner_failures;
  j["witness_max_outer_delta"] = p.witness_max_outer_delta;
  j["witness_max_placement_error"] = p.witness_max_placement_error;
  j["inner_exceeds_outer_count"] = p.inner_exceeds_outer_count;
  return j;
}

inline ordered_json to_json(const DiameterCheck& c) {
  ordered_json j;
  j["diam"] = c.diam;
  j["bound"] = c.bound;
  j["allowance"] = c.allowance;
  j["pass"] = c.pass;
  j["empty"] = c.empty;
  j["members"] = c.members;
  return j;
}

inline ordered_json to_json(const BicombingCheck& c) {
  ordered_json j;
  j["max_dev"] = c.max_dev;
  j["argmax_t"] = c.argmax_t;
  j["endpoint_distance"] = c.endpoint_distance;
  j["bound"] = c.bound;
  j["allowance"] = c.allowance;
  j["pass"] = c.pass;
  j["strong_holds"] = c.strong_holds;
  return j;
}

inline ordered_json to_json(const LoopIntegral& li) {
  ordered_json j;
  j["value"] = li.value;
  j["segments"] = li.segments;
  return j;
}

inline ordered_json md_summary_json(const MdField& f) {
  ordered_json j;
  j["grid"] = {{"nx", f.nx}, {"ny", f.ny}, {"spacing", f.h}};
  j["directions"] = f.directions;
  j["scales"] = f.scales;
  j["conv_tol"] = f.conv_tol;
  j["lip_est"] = f.lip_est;
  j["interior_nodes"] = f.interior_count;
  j["converged_nodes"] = f.converged_count;
  double md_min = std::numeric_limits<double>::infinity(), md_max = 0.0;
  for (std::size_t node = 0; node < f.interior.size(); ++node) {
    if (!f.interior[node] || !f.converged[node]) continue;
    for (int k = 0; k < f.directions; ++k) {
      const double v = f.md[node * f.directions + k];
      md_min = std::min(md_min, v);
      md_max = std::max(md_max, v);
    }
  }
  j["md_min"] = f.converged_count ? json_number(md_min) : ordered_json(0.0);
  j["md_max"] = md_max;
  return j;
}

inline ordered_json to_json(const SeminormReport& r) {
  ordered_json j;
  j["nodes_checked"] = r.nodes_checked;
  j["nodes_within_tol"] = r.nodes_within_tol;
  j["fraction_within_tol"] = r.fraction_within_tol();
  j["max_homogeneity"] = r.max_homogeneity;
  j["max_symmetry"] = r.max_symmetry;
  j["max_direction_lip"] = r.max_direction_lip;
  j["max_subadditivity"] = r.max_subadditivity;
  j["tol"] = r.tol;
  return j;
}

inline ordered_json to_json(const DegeneracyReport& r) {
  ordered_json j;
  j["fraction_degenerate"] = r.fraction;
  j["degenerate_nodes"] = r.degenerate;
  j["converged_nodes"] = r.converged;
  j["tau"] = r.tau;
  return j;
}

inline ordered_json to_json(const StokesReport& r) {
  ordered_json j;
  j["boundary_integral"] = r.boundary_integral;
  j["area_integral"] = r.area_integral;
  j["residual"] = r.residual;
  j["spacing"] = r.h;
  j["boundary_from_loop"] = r.boundary_from_loop;
  j["jacobian_nodes"] = r.cells;
  return j;
}

inline ordered_json to_json(const LensDemoResult& r) {
  ordered_json j;
  j["closed_form"] = r.closed_form;
  j["sampled"] = r.sampled;
  j["sample_count"] = r.sample_count;
  return j;
}

inline ordered_json to_json(const std::vector<BlowupRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["h"] = r.h;
    j["diam"] = r.diam;
    j["ratio"] = r.ratio;
    arr.push_back(j);
  }
  return arr;
}

// Self-contained run envelope: command, full config echo (seeds and
// tolerances included), results and the quantization allowances in force.
// Identical configs produce byte-identical payloads; wall time is attached
// only on request since it would break that guarantee.
inline ordered_json make_run_report(const std::string& command,
                                    ordered_json config, ordered_json results,
                                    ordered_json quantization = {},
                                    double wall_time_ms = -1.0) {
  ordered_json j;
  j["schema"] = 1;
  j["version"] = TREELENS_VERSION;
  j["command"] = command;
  j["config"] = std::move(config);
  if (!quantization.is_null()) j["quantization"] = std::move(quantization);
  j["results"] = std::move(results);
  if (wall_time_ms >= 0.0) j["wall_time_ms"] = wall_time_ms;
  return j;
}

}  // namespace treelens
