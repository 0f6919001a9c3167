// Batch front door: ingest spaces, loops, maps and fields; dispatch the
// analyses; emit self-contained JSON reports (CSV plot data on request).
//
// Exit codes: 0 success, 1 a checked mathematical bound failed (pass=false
// or a failed certification), 2 input or validation error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treelens/treelens.hpp"

namespace tl = treelens;
using tl::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBoundViolated = 1;
constexpr int kExitInputError = 2;

struct GlobalOptions {
  int threads = 0;  // 0: hardware default
  std::string out;
  bool csv = false;
  bool timing = false;
};

void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text << "\n";
  } else {
    tl::write_text_file(g.out, text + "\n");
  }
}

void emit_report(const GlobalOptions& g, ordered_json report) {
  emit(g, report.dump(2));
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

int effective_threads(const GlobalOptions& g) {
  return g.threads > 0 ? g.threads : tl::hardware_threads();
}

struct SpaceArgs {
  std::string path;
  std::string format = "auto";
  bool header = false;
  double tol = 1e-9;
};

void add_space_options(CLI::App* cmd, SpaceArgs& args) {
  cmd->add_option("space", args.path, "space file (.csv matrix or edge list)")
      ->required();
  cmd->add_option("--format", args.format, "space format: auto|matrix|edges")
      ->check(CLI::IsMember({"auto", "matrix", "edges"}));
  cmd->add_flag("--header", args.header, "matrix CSV has a header row");
  cmd->add_option("--metric-tol", args.tol, "metric validation tolerance");
}

ordered_json space_config(const SpaceArgs& args) {
  ordered_json j;
  j["space"] = args.path;
  j["format"] = args.format;
  j["header"] = args.header;
  j["tol_metric"] = args.tol;
  return j;
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   t0)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"treelens: tree-likeness, hyperbolicity and ball-lens diagnostics "
               "for finite metric spaces"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--threads", g.threads, "worker threads (default: hardware)");
  app.add_option("--out", g.out, "write the report to a file instead of stdout");
  app.add_flag("--csv", g.csv, "emit flat CSV plot data where supported");
  app.add_flag("--timing", g.timing, "attach wall time to the report");

  // --- validate ---
  SpaceArgs validate_args;
  auto* cmd_validate = app.add_subcommand("validate", "check the metric axioms");
  add_space_options(cmd_validate, validate_args);

  // --- hyperbolicity ---
  SpaceArgs hyp_args;
  std::string hyp_mode = "both";
  std::uint64_t hyp_budget = 2'000'000;
  std::uint64_t hyp_seed = 0;
  std::string hyp_geodesics = "canonical";
  auto* cmd_hyp = app.add_subcommand(
      "hyperbolicity", "thin-triangle and four-point hyperbolicity measurements");
  add_space_options(cmd_hyp, hyp_args);
  cmd_hyp->add_option("--mode", hyp_mode, "thin|4pt|both")
      ->check(CLI::IsMember({"thin", "4pt", "both"}));
  cmd_hyp->add_option("--budget", hyp_budget, "max tuples scanned exactly");
  cmd_hyp->add_option("--seed", hyp_seed, "sampling seed");
  cmd_hyp->add_option("--geodesics", hyp_geodesics,
                      "canonical or exhaustive:CAP (all geodesic choices)");

  // --- tree-check ---
  SpaceArgs tree_args;
  double tree_tol = 1e-9;
  auto* cmd_tree = app.add_subcommand("tree-check",
                                      "certify tree-ness via the exact four-point scan");
  add_space_options(cmd_tree, tree_args);
  cmd_tree->add_option("--tol", tree_tol, "four-point tolerance");

  // --- lens-scan ---
  SpaceArgs scan_args;
  std::string scan_radii = "auto";
  std::string scan_pairs = "all";
  std::uint64_t scan_seed = 0;
  bool scan_no_restrict = false;
  bool scan_no_witness = false;
  auto* cmd_scan = app.add_subcommand(
      "lens-scan", "distortion profile of two-ball intersections");
  add_space_options(cmd_scan, scan_args);
  cmd_scan->add_option("--radii", scan_radii, "auto or comma-separated radii");
  cmd_scan->add_option("--pairs", scan_pairs, "all or a sampling budget");
  cmd_scan->add_option("--seed", scan_seed, "pair sampling seed");
  cmd_scan->add_flag("--no-restrict-far", scan_no_restrict,
                     "also scan ball pairs with max(r,s) >= d(x,y)");
  cmd_scan->add_flag("--no-witness", scan_no_witness,
                     "skip per-lens geodesic witnesses");

  // --- witness ---
  SpaceArgs wit_args;
  int wit_x = 0, wit_y = 0;
  double wit_r = 0.0, wit_s = 0.0;
  auto* cmd_wit = app.add_subcommand(
      "witness", "geodesic midpoint witness for one ball pair");
  add_space_options(cmd_wit, wit_args);
  cmd_wit->add_option("--x", wit_x)->required();
  cmd_wit->add_option("--y", wit_y)->required();
  cmd_wit->add_option("--r", wit_r)->required();
  cmd_wit->add_option("--s", wit_s)->required();

  // --- lens-bound ---
  SpaceArgs bound_args;
  int bound_x = 0, bound_y = 0;
  double bound_t = 0.5, bound_h = 0.0, bound_lambda = 1.0;
  auto* cmd_bound = app.add_subcommand(
      "lens-bound", "check diam(B(x,tr+h) n B(y,(1-t)r+h)) <= 4*lambda*h");
  add_space_options(cmd_bound, bound_args);
  cmd_bound->add_option("--x", bound_x)->required();
  cmd_bound->add_option("--y", bound_y)->required();
  cmd_bound->add_option("--t", bound_t)->required();
  cmd_bound->add_option("--h", bound_h)->required();
  cmd_bound->add_option("--lambda", bound_lambda)->required();

  // --- loop-integral ---
  SpaceArgs loop_args;
  std::string loop_file, loop_f_file, loop_pi_file;
  auto* cmd_loop = app.add_subcommand(
      "loop-integral", "trapezoid Stieltjes integral of f d(pi) around a loop");
  add_space_options(cmd_loop, loop_args);
  cmd_loop->add_option("--loop", loop_file, "loop JSON")->required();
  cmd_loop->add_option("--f", loop_f_file, "scalar field JSON")->required();
  cmd_loop->add_option("--pi", loop_pi_file, "scalar field JSON")->required();

  // --- cone ---
  SpaceArgs cone_args;
  std::string cone_loop_file, cone_map_out;
  int cone_base = 0, cone_grid = 64;
  double cone_lambda = 1.0;
  auto* cmd_cone = app.add_subcommand(
      "cone", "radial geodesic extension of a loop to the disc");
  add_space_options(cmd_cone, cone_args);
  cmd_cone->add_option("--loop", cone_loop_file, "loop JSON")->required();
  cmd_cone->add_option("--base", cone_base, "base point index")->required();
  cmd_cone->add_option("--grid", cone_grid, "grid nodes per axis");
  cmd_cone->add_option("--map-out", cone_map_out, "write the map JSON here");
  cmd_cone->add_option("--lambda", cone_lambda,
                       "lens constant for the (8*lambda+12) Lipschitz bound");

  // --- md-field ---
  std::string md_map_file;
  int md_dirs = 16;
  double md_tau = 0.1;
  double md_conv_tol = -1.0;
  std::string md_scales = "4,2";
  auto* cmd_md = app.add_subcommand(
      "md-field", "metric directional derivative diagnostics of a sampled map");
  cmd_md->add_option("--map", md_map_file, "map JSON with space_ref")->required();
  cmd_md->add_option("--dirs", md_dirs, "direction count (even)");
  cmd_md->add_option("--tau", md_tau, "degeneracy ratio threshold");
  cmd_md->add_option("--scales", md_scales, "descending grid-step multiples");
  cmd_md->add_option("--conv-tol", md_conv_tol,
                     "ladder agreement tolerance (default 0.1*max(1, lip))");

  // --- stokes ---
  std::string stokes_map_file, stokes_f_file, stokes_pi_file;
  auto* cmd_stokes = app.add_subcommand(
      "stokes", "boundary loop integral vs integrated Jacobian determinant");
  cmd_stokes->add_option("--map", stokes_map_file, "map JSON")->required();
  cmd_stokes->add_option("--f", stokes_f_file, "scalar field JSON")->required();
  cmd_stokes->add_option("--pi", stokes_pi_file, "scalar field JSON")->required();

  // --- lens-demo ---
  double demo_r1 = 1.0;
  std::string demo_h_list = "0.5,0.05,0.005";
  std::uint64_t demo_samples = 100000;
  auto* cmd_demo = app.add_subcommand(
      "lens-demo", "Euclidean lens diameter blow-up (closed form vs sampled)");
  cmd_demo->add_option("--r1", demo_r1, "disc radius parameter");
  cmd_demo->add_option("--h-list", demo_h_list, "descending h values");
  cmd_demo->add_option("--samples", demo_samples, "sample budget per h");

  // --- rescale ---
  SpaceArgs rescale_args;
  std::string rescale_scales = "1,2,4,8";
  std::string rescale_radii = "auto";
  std::string rescale_pairs = "all";
  std::uint64_t rescale_seed = 0;
  bool rescale_no_restrict = false;
  auto* cmd_rescale = app.add_subcommand(
      "rescale", "distortion profiles of the same space under metric rescaling");
  add_space_options(cmd_rescale, rescale_args);
  cmd_rescale->add_option("--scales", rescale_scales, "ascending positive scales");
  cmd_rescale->add_option("--radii", rescale_radii, "auto or comma-separated radii");
  cmd_rescale->add_option("--pairs", rescale_pairs, "all or a sampling budget");
  cmd_rescale->add_option("--seed", rescale_seed, "pair sampling seed");
  cmd_rescale->add_flag("--no-restrict-far", rescale_no_restrict);

  // --- generate ---
  std::string gen_spec_text, gen_out;
  auto* cmd_gen = app.add_subcommand("generate", "write a generated space matrix");
  cmd_gen->add_option("--spec", gen_spec_text, "generator spec JSON (inline or @file)")
      ->required();
  cmd_gen->add_option("--gen-out", gen_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);
  const auto t0 = std::chrono::steady_clock::now();
  const int threads = effective_threads(g);

  auto finish = [&](const std::string& command, ordered_json config,
                    ordered_json results, ordered_json quantization = {},
                    int exit_code = kExitOk) {
    const double ms = g.timing ? wall_ms_since(t0) : -1.0;
    emit_report(g, tl::make_run_report(command, std::move(config), std::move(results),
                                       std::move(quantization), ms));
    return exit_code;
  };

  try {
    if (*cmd_validate) {
      auto space = tl::load_space(validate_args.path, validate_args.format,
                                  validate_args.header, validate_args.tol);
      ordered_json results;
      results["valid"] = true;
      results["n"] = space.n();
      results["diameter"] = space.diameter();
      results["quantum"] = space.quantum();
      return finish("validate", space_config(validate_args), results);
    }

    if (*cmd_hyp) {
      auto space = tl::load_space(hyp_args.path, hyp_args.format, hyp_args.header,
                                  hyp_args.tol);
      tl::ThinnessOptions topts;
      if (hyp_geodesics.rfind("exhaustive", 0) == 0) {
        topts.mode = tl::GeodesicMode::exhaustive;
        const auto colon = hyp_geodesics.find(':');
        if (colon != std::string::npos)
          topts.enumeration_cap = std::stoull(hyp_geodesics.substr(colon + 1));
      } else if (hyp_geodesics != "canonical") {
        throw tl::Error(tl::errkind::invalid_spec,
                        "--geodesics must be canonical or exhaustive[:CAP]");
      }
      ordered_json config = space_config(hyp_args);
      config["mode"] = hyp_mode;
      config["budget"] = hyp_budget;
      config["seed"] = hyp_seed;
      config["geodesics"] = hyp_geodesics;

      ordered_json results;
      ordered_json quant;
      if (hyp_mode == "thin" || hyp_mode == "both") {
        auto rep = tl::space_thinness(space, hyp_budget, hyp_seed, topts, threads);
        results["thinness"] = tl::to_json(rep);
        quant["thinness"] = rep.quantization;
      }
      if (hyp_mode == "4pt" || hyp_mode == "both")
        results["four_point"] =
            tl::to_json(tl::four_point_delta(space, hyp_budget, hyp_seed, threads));
      return finish("hyperbolicity", config, results, quant);
    }

    if (*cmd_tree) {
      auto space = tl::load_space(tree_args.path, tree_args.format, tree_args.header,
                                  tree_args.tol);
      auto cert = tl::certify_tree(space, tree_tol, threads);
      ordered_json config = space_config(tree_args);
      config["tree_tol"] = tree_tol;
      return finish("tree-check", config, tl::to_json(cert), {},
                    cert.is_tree ? kExitOk : kExitBoundViolated);
    }

    if (*cmd_scan) {
      auto space = tl::load_space(scan_args.path, scan_args.format, scan_args.header,
                                  scan_args.tol);
      tl::ScanConfig cfg;
      cfg.threads = threads;
      cfg.seed = scan_seed;
      cfg.restrict_far = !scan_no_restrict;
      cfg.with_witness = !scan_no_witness;
      if (scan_radii != "auto") cfg.radius_grid = parse_double_list(scan_radii);
      if (scan_pairs != "all") cfg.pair_budget = std::stoull(scan_pairs);

      ordered_json config = space_config(scan_args);
      config["radii"] = scan_radii;
      config["pairs"] = scan_pairs;
      config["seed"] = scan_seed;
      config["restrict_far"] = cfg.restrict_far;
      config["witness"] = cfg.with_witness;
      config["tau_ball"] = cfg.tau_ball;

      auto profile = tl::diamond_scan(space, cfg);
      ordered_json quant;
      quant["quantum"] = profile.quantum;
      return finish("lens-scan", config, tl::to_json(profile), quant);
    }

    if (*cmd_wit) {
      auto space = tl::load_space(wit_args.path, wit_args.format, wit_args.header,
                                  wit_args.tol);
      auto members = tl::intersect_balls(space, tl::Ball{wit_x, wit_r},
                                         tl::Ball{wit_y, wit_s});
      auto report = tl::make_lens_report(space, wit_x, wit_r, wit_y, wit_s,
                                         std::move(members), true);
      ordered_json config = space_config(wit_args);
      config["x"] = wit_x;
      config["y"] = wit_y;
      config["r"] = wit_r;
      config["s"] = wit_s;
      ordered_json quant;
      quant["quantum"] = space.quantum();
      return finish("witness", config, tl::to_json(report), quant);
    }

    if (*cmd_bound) {
      auto space = tl::load_space(bound_args.path, bound_args.format,
                                  bound_args.header, bound_args.tol);
      auto check = tl::lens_diameter_check(space, bound_x, bound_y, bound_t, bound_h,
                                           bound_lambda);
      ordered_json config = space_config(bound_args);
      config["x"] = bound_x;
      config["y"] = bound_y;
      config["t"] = bound_t;
      config["h"] = bound_h;
      config["lambda"] = bound_lambda;
      ordered_json quant;
      quant["allowance"] = check.allowance;
      return finish("lens-bound", config, tl::to_json(check), quant,
                    check.pass ? kExitOk : kExitBoundViolated);
    }

    if (*cmd_loop) {
      auto space = tl::load_space(loop_args.path, loop_args.format, loop_args.header,
                                  loop_args.tol);
      auto loop = tl::loop_from_json(tl::read_json_file(loop_file));
      auto f = tl::field_from_json(tl::read_json_file(loop_f_file));
      auto pi = tl::field_from_json(tl::read_json_file(loop_pi_file));
      tl::validate_field(space, f);
      tl::validate_field(space, pi);
      auto li = tl::loop_integral(space, loop, f, pi);
      ordered_json config = space_config(loop_args);
      config["loop"] = loop_file;
      config["f"] = loop_f_file;
      config["pi"] = loop_pi_file;
      ordered_json results = tl::to_json(li);
      results["loop_lip"] = loop.lip(space);
      return finish("loop-integral", config, results);
    }

    if (*cmd_cone) {
      auto space = tl::load_space(cone_args.path, cone_args.format, cone_args.header,
                                  cone_args.tol);
      auto loop = tl::loop_from_json(tl::read_json_file(cone_loop_file));
      auto map = tl::cone_extension(space, loop, cone_base, cone_grid);
      ordered_json config = space_config(cone_args);
      config["loop"] = cone_loop_file;
      config["base"] = cone_base;
      config["grid"] = cone_grid;
      config["lambda"] = cone_lambda;
      const double lip_circle = loop.lip_circle(space);
      const double lip_ext = map.lip_est(space);
      const double lip_bound =
          (8.0 * cone_lambda + 12.0) * lip_circle + 2.0 * map.grid.h;
      ordered_json results;
      results["lip_loop"] = loop.lip(space);
      results["lip_loop_circle"] = lip_circle;
      results["lip_est"] = lip_ext;
      results["lip_bound"] = lip_bound;
      results["lip_ok"] = lip_ext <= lip_bound;
      results["grid"] = {{"nx", map.grid.nx},
                         {"ny", map.grid.ny},
                         {"spacing", map.grid.h}};
      if (!cone_map_out.empty()) {
        tl::write_text_file(cone_map_out,
                            tl::map_to_json(map, cone_args.path).dump(2));
        results["map_file"] = cone_map_out;
      } else {
        results["map"] = tl::map_to_json(map, cone_args.path);
      }
      return finish("cone", config, results, {},
                    lip_ext <= lip_bound ? kExitOk : kExitBoundViolated);
    }

    if (*cmd_md) {
      auto map_json = tl::read_json_file(md_map_file);
      auto map = tl::map_from_json(map_json);
      auto space = tl::load_space_ref(map_json, md_map_file);
      tl::MdOptions opts;
      opts.directions = md_dirs;
      opts.conv_tol = md_conv_tol;
      opts.scales.clear();
      for (double v : parse_double_list(md_scales))
        opts.scales.push_back(static_cast<int>(v));
      auto field = tl::md_field(space, map, opts);
      auto degeneracy = tl::degeneracy_field(field, md_tau);
      auto seminorm = tl::seminorm_check(field);
      ordered_json config;
      config["map"] = md_map_file;
      config["dirs"] = md_dirs;
      config["scales"] = opts.scales;
      config["tau"] = md_tau;
      config["conv_tol"] = field.conv_tol;
      ordered_json results;
      results["md"] = tl::md_summary_json(field);
      results["degeneracy"] = tl::to_json(degeneracy);
      results["seminorm"] = tl::to_json(seminorm);
      return finish("md-field", config, results);
    }

    if (*cmd_stokes) {
      auto map = tl::map_from_json(tl::read_json_file(stokes_map_file));
      auto f = tl::field_from_json(tl::read_json_file(stokes_f_file));
      auto pi = tl::field_from_json(tl::read_json_file(stokes_pi_file));
      auto rep = tl::stokes_check(map, f, pi);
      ordered_json config;
      config["map"] = stokes_map_file;
      config["f"] = stokes_f_file;
      config["pi"] = stokes_pi_file;
      return finish("stokes", config, tl::to_json(rep));
    }

    if (*cmd_demo) {
      auto h_list = parse_double_list(demo_h_list);
      auto rows = tl::lens_blowup_curve(demo_r1, h_list);
      ordered_json config;
      config["r1"] = demo_r1;
      config["h_list"] = h_list;
      config["samples"] = demo_samples;
      if (g.csv) {
        std::ostringstream csv;
        csv << "h,diam,ratio";
        char buf[3 * 32];
        for (const auto& row : rows) {
          std::snprintf(buf, sizeof(buf), "\n%.17g,%.17g,%.17g", row.h, row.diam,
                        row.ratio);
          csv << buf;
        }
        emit(g, csv.str());
        return kExitOk;
      }
      ordered_json results;
      results["curve"] = tl::to_json(rows);
      ordered_json sampled = ordered_json::array();
      for (double h : h_list)
        sampled.push_back(
            tl::to_json(tl::euclidean_lens_diameter(demo_r1, h, demo_samples)));
      results["sampled"] = sampled;
      return finish("lens-demo", config, results);
    }

    if (*cmd_rescale) {
      auto space = tl::load_space(rescale_args.path, rescale_args.format,
                                  rescale_args.header, rescale_args.tol);
      tl::ScanConfig cfg;
      cfg.threads = threads;
      cfg.seed = rescale_seed;
      cfg.restrict_far = !rescale_no_restrict;
      if (rescale_radii != "auto") cfg.radius_grid = parse_double_list(rescale_radii);
      if (rescale_pairs != "all") cfg.pair_budget = std::stoull(rescale_pairs);
      auto scales = parse_double_list(rescale_scales);
      auto sweep = tl::rescale_sweep(space, scales, cfg);

      ordered_json config = space_config(rescale_args);
      config["scales"] = scales;
      config["radii"] = rescale_radii;
      config["pairs"] = rescale_pairs;
      config["seed"] = rescale_seed;
      config["restrict_far"] = cfg.restrict_far;

      if (g.csv) {
        std::ostringstream csv;
        csv << "sigma,sup_gap_add,sup_lambda_mult";
        char buf[3 * 32];
        for (const auto& [sigma, profile] : sweep) {
          std::snprintf(buf, sizeof(buf), "\n%.17g,%.17g,%.17g", sigma,
                        profile.sup_gap_add, profile.sup_lambda_mult);
          csv << buf;
        }
        emit(g, csv.str());
        return kExitOk;
      }
      ordered_json results = ordered_json::array();
      for (const auto& [sigma, profile] : sweep) {
        ordered_json row;
        row["sigma"] = sigma;
        row["profile"] = tl::to_json(profile);
        results.push_back(row);
      }
      ordered_json wrapped;
      wrapped["sweep"] = results;
      return finish("rescale", config, wrapped);
    }

    if (*cmd_gen) {
      ordered_json spec_json;
      if (!gen_spec_text.empty() && gen_spec_text[0] == '@')
        spec_json = tl::read_json_file(gen_spec_text.substr(1));
      else
        spec_json = ordered_json::parse(gen_spec_text);
      auto spec = tl::generator_spec_from_json(spec_json);
      auto space = tl::generate(spec);
      std::ofstream out(gen_out);
      if (!out) throw tl::Error(tl::errkind::io_error, "cannot write " + gen_out);
      tl::write_matrix_csv(out, space);
      ordered_json config;
      config["spec"] = tl::generator_spec_to_json(spec);
      config["out"] = gen_out;
      ordered_json results;
      results["n"] = space.n();
      results["diameter"] = space.diameter();
      return finish("generate", config, results);
    }
  } catch (const tl::MetricValidationError& e) {
    ordered_json err;
    err["error"]["kind"] = e.kind();
    err["error"]["message"] = e.what();
    ordered_json violations = ordered_json::array();
    for (const auto& v : e.violations()) violations.push_back(tl::to_json(v));
    err["error"]["violations"] = violations;
    emit_report(g, err);
    return kExitInputError;
  } catch (const tl::Error& e) {
    ordered_json err;
    err["error"]["kind"] = e.kind();
    err["error"]["message"] = e.what();
    emit_report(g, err);
    return kExitInputError;
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"]["kind"] = tl::errkind::internal_error;
    err["error"]["message"] = e.what();
    emit_report(g, err);
    return kExitInputError;
  }

  std::cerr << "no subcommand executed\n";
  return kExitInputError;
}
