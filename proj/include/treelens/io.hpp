#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "treelens/gallery.hpp"
#include "treelens/lipschitz.hpp"
#include "treelens/metric_space.hpp"

namespace treelens {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Edge lists: one "u v w" edge per line, 0-based ids, positive weight,
// '#' comments and blank lines ignored. Vertex count is max id + 1.

inline GraphSpec read_edge_list(std::istream& in, const std::string& origin = "<stream>") {
  GraphSpec g;
  std::string line;
  int lineno = 0;
  int max_id = -1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long u, v;
    double w;
    if (!(ls >> u)) continue;  // blank or comment-only
    if (!(ls >> v >> w)) {
      std::ostringstream os;
      os << origin << ":" << lineno << ": expected 'u v w'";
      throw Error(errkind::io_error, os.str());
    }
    std::string trailing;
    if (ls >> trailing) {
      std::ostringstream os;
      os << origin << ":" << lineno << ": trailing tokens after 'u v w'";
      throw Error(errkind::io_error, os.str());
    }
    if (u < 0 || v < 0) {
      std::ostringstream os;
      os << origin << ":" << lineno << ": vertex ids must be non-negative";
      throw Error(errkind::io_error, os.str());
    }
    g.edges.push_back({static_cast<int>(u), static_cast<int>(v), w});
    max_id = std::max(max_id, static_cast<int>(std::max(u, v)));
  }
  g.vertex_count = max_id + 1;
  if (g.vertex_count == 0)
    throw Error(errkind::io_error, origin + ": no edges found");
  return g;
}

inline void write_edge_list(std::ostream& out, const GraphSpec& g) {
  char buf[64];
  for (const auto& e : g.edges) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.w);
    out << e.u << ' ' << e.v << ' ' << buf << '\n';
  }
}

// ---------------------------------------------------------------------------
// Distance matrices as CSV, row i = distances from point i.

inline std::vector<std::vector<double>> read_matrix_csv(std::istream& in,
                                                        bool has_header,
                                                        const std::string& origin = "<stream>") {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool skipped_header = !has_header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() &&
               (cell[used] == ' ' || cell[used] == '\t' || cell[used] == '\r'))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        std::ostringstream os;
        os << origin << ":" << lineno << ": bad numeric cell '" << cell << "'";
        throw Error(errkind::io_error, os.str());
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(errkind::io_error, origin + ": empty matrix");
  return rows;
}

inline void write_matrix_csv(std::ostream& out, const FiniteMetricSpace& space) {
  char buf[64];
  for (int i = 0; i < space.n(); ++i) {
    for (int j = 0; j < space.n(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", space.d(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Space loading with extension dispatch: .csv matrices, anything else an
// edge list (override with the format argument: "matrix" / "edges").

inline FiniteMetricSpace load_space(const std::filesystem::path& path,
                                    const std::string& format = "auto",
                                    bool has_header = false,
                                    double tol_metric = 1e-9) {
  std::ifstream in(path);
  if (!in) throw Error(errkind::io_error, "cannot open " + path.string());
  std::string fmt = format;
  if (fmt == "auto")
    fmt = path.extension() == ".csv" ? "matrix" : "edges";
  if (fmt == "matrix") {
    auto rows = read_matrix_csv(in, has_header, path.string());
    return FiniteMetricSpace::from_rows(rows, tol_metric);
  }
  if (fmt == "edges")
    return metric_from_graph(read_edge_list(in, path.string()), tol_metric);
  throw Error(errkind::io_error, "unknown space format '" + format + "'");
}

// ---------------------------------------------------------------------------
// JSON payloads for loops, scalar fields and sampled maps.

inline ordered_json loop_to_json(const SampledLoop& loop,
                                 const std::string& space_ref = "") {
  ordered_json j;
  j["schema"] = 1;
  if (!space_ref.empty()) j["space_ref"] = space_ref;
  j["times"] = loop.times;
  j["points"] = loop.points;
  return j;
}

inline SampledLoop loop_from_json(const ordered_json& j) {
  SampledLoop loop;
  loop.times = j.at("times").get<std::vector<double>>();
  loop.points = j.at("points").get<std::vector<int>>();
  return loop;
}

inline ordered_json field_to_json(const ScalarField& f) {
  ordered_json j;
  j["schema"] = 1;
  j["values"] = f.values;
  j["lip"] = f.lip;
  return j;
}

inline ScalarField field_from_json(const ordered_json& j) {
  ScalarField f;
  f.values = j.at("values").get<std::vector<double>>();
  f.lip = j.at("lip").get<double>();
  return f;
}

inline ordered_json map_to_json(const SampledMap& map,
                                const std::string& space_ref = "") {
  ordered_json j;
  j["schema"] = 1;
  if (!space_ref.empty()) j["space_ref"] = space_ref;
  ordered_json grid;
  grid["shape"] = {map.grid.nx, map.grid.ny};
  grid["origin"] = {map.grid.x0, map.grid.y0};
  grid["spacing"] = map.grid.h;
  std::vector<std::string> mask_rows(map.grid.ny);
  for (int jj = 0; jj < map.grid.ny; ++jj) {
    std::string& row = mask_rows[jj];
    row.resize(map.grid.nx);
    for (int i = 0; i < map.grid.nx; ++i)
      row[i] = map.grid.mask[map.grid.id(i, jj)] ? '1' : '0';
  }
  grid["mask"] = mask_rows;
  j["grid"] = grid;
  j["values"] = map.values;
  if (map.boundary) j["boundary"] = loop_to_json(*map.boundary);
  return j;
}

inline SampledMap map_from_json(const ordered_json& j) {
  SampledMap map;
  const auto& grid = j.at("grid");
  const auto shape = grid.at("shape").get<std::vector<int>>();
  if (shape.size() != 2) throw Error(errkind::io_error, "grid shape must be [nx, ny]");
  map.grid.nx = shape[0];
  map.grid.ny = shape[1];
  if (grid.contains("origin")) {
    const auto origin = grid.at("origin").get<std::vector<double>>();
    map.grid.x0 = origin.at(0);
    map.grid.y0 = origin.at(1);
  }
  map.grid.h = grid.at("spacing").get<double>();
  const auto mask_rows = grid.at("mask").get<std::vector<std::string>>();
  if (static_cast<int>(mask_rows.size()) != map.grid.ny)
    throw Error(errkind::io_error, "mask row count does not match shape");
  map.grid.mask.assign(map.grid.size(), 0);
  for (int jj = 0; jj < map.grid.ny; ++jj) {
    if (static_cast<int>(mask_rows[jj].size()) != map.grid.nx)
      throw Error(errkind::io_error, "mask row length does not match shape");
    for (int i = 0; i < map.grid.nx; ++i)
      map.grid.mask[map.grid.id(i, jj)] = mask_rows[jj][i] == '1' ? 1 : 0;
  }
  map.values = j.at("values").get<std::vector<std::int32_t>>();
  if (map.values.size() != map.grid.size())
    throw Error(errkind::io_error, "value count does not match grid");
  if (j.contains("boundary")) map.boundary = loop_from_json(j.at("boundary"));
  return map;
}

inline ordered_json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errkind::io_error, "cannot open " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw Error(errkind::io_error, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(errkind::io_error, "cannot write " + path.string());
  out << text;
}

// Resolves a space_ref stored in a JSON payload relative to that file's
// directory, then loads the space.
inline FiniteMetricSpace load_space_ref(const ordered_json& j,
                                        const std::filesystem::path& json_path) {
  if (!j.contains("space_ref"))
    throw Error(errkind::io_error,
                json_path.string() + ": payload has no space_ref");
  std::filesystem::path ref = j.at("space_ref").get<std::string>();
  if (ref.is_relative()) ref = json_path.parent_path() / ref;
  return load_space(ref);
}

// ---------------------------------------------------------------------------
// Generator specs as JSON (CLI input).

inline GeneratorSpec generator_spec_from_json(const ordered_json& j) {
  GeneratorSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "path") spec.kind = SpaceKind::path;
  else if (kind == "star") spec.kind = SpaceKind::star;
  else if (kind == "cycle") spec.kind = SpaceKind::cycle;
  else if (kind == "grid") spec.kind = SpaceKind::grid;
  else if (kind == "random_tree") spec.kind = SpaceKind::random_tree;
  else if (kind == "normed_disc_sample") spec.kind = SpaceKind::normed_disc_sample;
  else if (kind == "snowflake_line") spec.kind = SpaceKind::snowflake_line;
  else if (kind == "perturbed_tree") spec.kind = SpaceKind::perturbed_tree;
  else throw Error(errkind::invalid_spec, "unknown generator kind '" + kind + "'");

  if (j.contains("n")) spec.n = j.at("n").get<int>();
  if (j.contains("rows")) spec.rows = j.at("rows").get<int>();
  if (j.contains("cols")) spec.cols = j.at("cols").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("weight_lo")) spec.weight_lo = j.at("weight_lo").get<double>();
  if (j.contains("weight_hi")) spec.weight_hi = j.at("weight_hi").get<double>();
  if (j.contains("exponent")) spec.exponent = j.at("exponent").get<double>();
  if (j.contains("spacing")) spec.spacing = j.at("spacing").get<double>();
  if (j.contains("perturbation"))
    spec.perturbation = j.at("perturbation").get<double>();
  if (j.contains("norm")) {
    const std::string norm = j.at("norm").get<std::string>();
    if (norm == "l1") spec.norm = NormKind::l1;
    else if (norm == "l2") spec.norm = NormKind::l2;
    else if (norm == "linf") spec.norm = NormKind::linf;
    else throw Error(errkind::invalid_spec, "unknown norm '" + norm + "'");
  }
  return spec;
}

inline ordered_json generator_spec_to_json(const GeneratorSpec& spec) {
  ordered_json j;
  j["kind"] = to_string(spec.kind);
  j["n"] = spec.n;
  if (spec.kind == SpaceKind::grid) {
    j["rows"] = spec.rows;
    j["cols"] = spec.cols;
  }
  j["seed"] = spec.seed;
  j["weight_lo"] = spec.weight_lo;
  j["weight_hi"] = spec.weight_hi;
  if (spec.kind == SpaceKind::normed_disc_sample) j["norm"] = to_string(spec.norm);
  if (spec.kind == SpaceKind::snowflake_line) {
    j["exponent"] = spec.exponent;
    j["spacing"] = spec.spacing;
  }
  if (spec.kind == SpaceKind::perturbed_tree) j["perturbation"] = spec.perturbation;
  return j;
}

}  // namespace treelens
