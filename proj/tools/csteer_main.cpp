// Command-line surface for the contact-steer library: factorization, null and
// positive path synthesis, subdivision chains, the positivity extension
// pipeline, Legendrian transport and report verification.
//
// Exit status: 0 verdict match / success, 1 verification failure, 2 usage
// error. Reports are deterministic JSON; path and isotopy samples are JSONL.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "csteer/csteer.hpp"

namespace {

using namespace csteer;

struct GlobalOpts {
  int grid_n = 11;
  double box_half_width = 1.0;
  double tol = 1e-9;
  int time_samples = 32;
  std::uint64_t seed = 0;
  std::string out_file;      // report JSON; stdout when empty
  std::string samples_file;  // path samples JSONL; skipped when empty
};

GridSpec make_grid(const GlobalOpts& g) { return GridSpec{Box::cube(g.box_half_width), g.grid_n}; }

VerifyConfig make_verify_config(const GlobalOpts& g) {
  VerifyConfig cfg;
  cfg.grid = make_grid(g);
  cfg.tol = g.tol;
  cfg.time_samples = g.time_samples;
  cfg.seed = g.seed;
  return cfg;
}

void emit_report(const GlobalOpts& g, const json& j) {
  if (g.out_file.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream os(g.out_file);
  if (!os) throw ConfigError("cannot open output file '" + g.out_file + "'");
  os << j.dump(2) << "\n";
}

void emit_samples(const GlobalOpts& g, const DiffeoPath& path, const VerifyConfig& cfg,
                  Verdict verdict) {
  if (g.samples_file.empty()) return;
  std::ofstream os(g.samples_file);
  if (!os) throw ConfigError("cannot open samples file '" + g.samples_file + "'");
  write_path_jsonl(os, path, cfg, verdict);
}

DiffeoSpec resolve_map(const std::string& map_src, const std::string& builtin,
                       double box_half_width) {
  if (!map_src.empty() && !builtin.empty())
    throw ConfigError("give either --map or --builtin, not both");
  if (!map_src.empty()) return DiffeoSpec::parsed(map_src, Box::cube(10.0 * box_half_width));
  if (!builtin.empty()) return builtin_map(builtin);
  throw ConfigError("one of --map or --builtin is required");
}

json recipe_json(const std::string& kind, const std::string& map_src, const std::string& builtin,
                 std::optional<double> eps, double reeb_time, const GlobalOpts& g) {
  json r;
  r["kind"] = kind;
  if (!map_src.empty()) r["map"] = map_src;
  if (!builtin.empty()) r["builtin"] = builtin;
  if (eps)
    r["eps"] = *eps;
  else
    r["eps"] = "auto";
  if (kind == "positive-path") r["reeb_time"] = reeb_time;
  r["box"] = g.box_half_width;
  r["grid"] = g.grid_n;
  return r;
}

/// Rebuild a path from a recipe object (the "recipe" field of a construction
/// report), so isotopy transport can consume previously constructed paths
/// deterministically.
DiffeoPath path_from_recipe(const json& r) {
  const std::string kind = r.at("kind").get<std::string>();
  const double half = r.value("box", 1.0);
  const int grid_n = r.value("grid", 11);
  const GridSpec box{Box::cube(half), grid_n};
  std::optional<double> eps;
  if (r.contains("eps") && r["eps"].is_number()) eps = r["eps"].get<double>();
  const std::string map_src = r.value("map", "");
  const std::string builtin = r.value("builtin", "");
  if (kind == "null-path") {
    return null_path_to(resolve_map(map_src, builtin, half), eps, box).path;
  }
  if (kind == "positive-path") {
    return positive_path_to(resolve_map(map_src, builtin, half), r.at("reeb_time").get<double>(),
                            eps, box)
        .path;
  }
  if (kind == "connect") {
    std::optional<int> m;
    if (r.contains("m") && r["m"].is_number()) m = r["m"].get<int>();
    return subdivide_and_connect(builtin_family(r.at("family").get<std::string>()), m, eps, box)
        .path;
  }
  throw ConfigError("unknown recipe kind '" + kind + "'");
}

int run_factorize(const GlobalOpts& g, const std::string& map_src, const std::string& builtin,
                  std::optional<double> eps) {
  const DiffeoSpec f = resolve_map(map_src, builtin, g.box_half_width);
  const GridSpec box = make_grid(g);
  const double e = eps ? *eps : auto_epsilon(f, box);
  const Factorization F = factorize(f, e, box);
  json j;
  j["schema"] = "csteer-factorization";
  j["version"] = kPathSchemaVersion;
  j["source"] = f.describe();
  j["eps"] = e;
  j["eps_mode"] = eps ? "given" : "auto";
  j["residual_sup"] = F.residual_sup;
  j["amplitude_bound"] = F.amplitude_bound;
  j["conjugator"] = {{"plateau", F.conj.plateau}, {"support", F.conj.support}};
  json amps = json::array();
  for (const Point& p : GridSpec{box.box, 3}.points()) {
    json a;
    a["p"] = vec_to_json(p);
    a["a1"] = F.a1.value(p);
    a["a2"] = F.a2.value(p);
    a["a3"] = F.a3.value(p);
    amps.push_back(a);
  }
  j["amplitudes"] = amps;
  j["grid"] = grid_to_json(box);
  emit_report(g, j);
  return 0;
}

int run_null_path(const GlobalOpts& g, const std::string& map_src, const std::string& builtin,
                  std::optional<double> eps) {
  const DiffeoSpec f = resolve_map(map_src, builtin, g.box_half_width);
  const GridSpec box = make_grid(g);
  const NullPathResult r = null_path_to(f, eps, box);
  const VerifyConfig cfg = make_verify_config(g);
  VerificationReport rep = verify(r.path, &f, cfg);
  json j = report_to_json(rep);
  j["recipe"] = recipe_json("null-path", map_src, builtin, eps, 0.0, g);
  j["eps"] = r.eps;
  j["residual_sup"] = r.residual_sup;
  emit_report(g, j);
  emit_samples(g, r.path, cfg, rep.verdict);
  return rep.verdict == Verdict::Null ? 0 : 1;
}

int run_positive_path(const GlobalOpts& g, const std::string& map_src, const std::string& builtin,
                      std::optional<double> eps, double reeb_time) {
  const DiffeoSpec f = resolve_map(map_src, builtin, g.box_half_width);
  const GridSpec box = make_grid(g);
  const PositivePathResult r = positive_path_to(f, reeb_time, eps, box);
  const VerifyConfig cfg = make_verify_config(g);
  VerificationReport rep = verify(r.path, &f, cfg);
  json j = report_to_json(rep);
  j["recipe"] = recipe_json("positive-path", map_src, builtin, eps, reeb_time, g);
  j["eps"] = r.null_part.eps;
  j["reeb_time"] = reeb_time;
  emit_report(g, j);
  emit_samples(g, r.path, cfg, rep.verdict);
  return rep.verdict == Verdict::Positive ? 0 : 1;
}

int run_connect(const GlobalOpts& g, const std::string& family_spec, const std::string& subdivide,
                std::optional<double> eps) {
  const DiffeoFamily fam = builtin_family(family_spec);
  const GridSpec box = make_grid(g);
  std::optional<int> m;
  if (subdivide != "auto") m = std::stoi(subdivide);
  const NullPathResult r = subdivide_and_connect(fam, m, eps, box);
  const DiffeoSpec target = fam.at(1.0);
  const VerifyConfig cfg = make_verify_config(g);
  VerificationReport rep = verify(r.path, &target, cfg);
  json j = report_to_json(rep);
  json recipe;
  recipe["kind"] = "connect";
  recipe["family"] = family_spec;
  recipe["m"] = r.subdivisions;
  recipe["eps"] = r.eps;
  recipe["box"] = g.box_half_width;
  recipe["grid"] = g.grid_n;
  j["recipe"] = recipe;
  j["subdivisions"] = r.subdivisions;
  j["eps"] = r.eps;
  j["residual_sup"] = r.residual_sup;
  emit_report(g, j);
  emit_samples(g, r.path, cfg, rep.verdict);
  return rep.verdict == Verdict::Null ? 0 : 1;
}

int run_extend(const GlobalOpts& g, const std::string& hamiltonian_spec, double k0,
               const std::string& bump_height, int verify_grid_n, int verify_time_samples) {
  ContactPathInput input;
  input.hamiltonian = builtin_hamiltonian(hamiltonian_spec);
  input.family = hamiltonian_family(*input.hamiltonian, 1.0, 1.0 / 32);
  input.k0 = k0;
  ExtensionConfig cfg;
  cfg.verify_grid_n = verify_grid_n;
  cfg.verify_time_samples = verify_time_samples;
  cfg.classify_tol = g.tol;
  std::optional<ExtensionParams> par;
  if (bump_height != "auto") {
    ExtensionParams p = compute_constants(input, cfg);
    p.bump_height = std::stod(bump_height);
    par = p;
  }
  const ExtensionResult res = extend_positive(input, par, cfg);
  json j;
  j["schema"] = "csteer-extension";
  j["version"] = kPathSchemaVersion;
  j["hamiltonian"] = input.hamiltonian->label;
  j["trivial"] = res.trivial;
  j["constants"] = {{"k0", res.params.k0},       {"k1", res.params.k1},
                    {"k2", res.params.k2},       {"k3", res.params.k3},
                    {"k3_effective", res.params.k3_effective},
                    {"c1", res.params.c1},       {"c2", res.params.c2},
                    {"bump_height", res.params.bump_height}};
  j["classification"] = classify_to_json(res.classification);
  j["far_field_sup"] = res.far_field_sup;
  j["containment_max_radius"] = res.containment_max_radius;
  j["endpoint_error_id"] = res.endpoint_error_id;
  j["endpoint_error_f1"] = res.endpoint_error_f1;
  j["subdivisions"] = res.subdivisions;
  j["eps"] = res.eps;
  emit_report(g, j);
  return res.classification.verdict == Verdict::Positive ? 0 : 1;
}

int run_legendrian(const GlobalOpts& g, const std::string& jet_src, const std::string& path_from,
                   double y0, double y1, int count, const std::string& iso_out) {
  const ScalarField1D u = parse_field1d(jet_src);
  const LegendrianSample L = jet_legendrian(u, y0, y1, count);
  DiffeoPath path;
  if (!path_from.empty()) {
    std::ifstream is(path_from);
    if (!is) throw ConfigError("cannot open path recipe file '" + path_from + "'");
    json r = json::parse(is);
    path = path_from_recipe(r.contains("recipe") ? r["recipe"] : r);
  } else {
    PathBuilder b(Box::cube(g.box_half_width), "stationary");
    path = b.finish();
  }
  const IsotopySample iso = transport(L, path, g.time_samples);
  const Verdict verdict = isotopy_classify(iso, g.tol);
  json j;
  j["schema"] = "csteer-isotopy";
  j["version"] = kPathSchemaVersion;
  j["jet"] = u.label;
  j["path"] = path.label;
  j["verdict"] = verdict_name(verdict);
  j["min_alpha"] = iso.min_alpha;
  j["max_alpha"] = iso.max_alpha;
  j["max_abs_alpha"] = iso.max_abs_alpha;
  j["max_tangent_alpha"] = iso.max_tangent_alpha;
  j["legendrian_deviation_initial"] = legendrian_deviation(L);
  emit_report(g, j);
  if (!iso_out.empty()) {
    std::ofstream os(iso_out);
    if (!os) throw ConfigError("cannot open isotopy output file '" + iso_out + "'");
    write_isotopy_jsonl(os, iso, u.label + " via " + path.label);
  }
  return 0;
}

int run_verify(const GlobalOpts& g, const std::string& path_file, const std::string& target_src,
               const std::string& expect) {
  std::ifstream is(path_file);
  if (!is) throw ConfigError("cannot open path samples file '" + path_file + "'");
  const PathSamples ps = read_path_jsonl(is);
  std::optional<DiffeoSpec> target;
  if (!target_src.empty()) target = DiffeoSpec::parsed(target_src, Box::cube(1e18));
  const SampleVerification v =
      verify_samples(ps.samples, target ? &*target : nullptr, g.tol);
  std::string expected = expect;
  if (expected.empty() && ps.header.contains("verdict"))
    expected = ps.header["verdict"].get<std::string>();
  json j;
  j["schema"] = "csteer-verify";
  j["version"] = kPathSchemaVersion;
  j["file"] = path_file;
  j["verdict"] = verdict_name(v.verdict);
  j["expected"] = expected.empty() ? "(none)" : expected;
  j["min_alpha"] = v.min_alpha;
  j["max_alpha"] = v.max_alpha;
  j["max_abs_alpha"] = v.max_abs_alpha;
  j["hofer_length"] = v.hofer;
  if (v.endpoint_sup_error) j["endpoint_sup_error"] = *v.endpoint_sup_error;
  emit_report(g, j);
  if (!expected.empty() && expected != verdict_name(v.verdict)) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contact-steer: horizontal factorization and null/positive path synthesis on "
               "standard contact R^3"};
  app.fallthrough();  // global flags may follow the subcommand name
  app.set_config("--config", "", "config file (key=value per line; flags take precedence)");

  GlobalOpts g;
  app.add_option("--grid", g.grid_n, "samples per axis of the certification grid")
      ->capture_default_str();
  app.add_option("--box", g.box_half_width, "half-width of the certification box")
      ->capture_default_str();
  app.add_option("--tol", g.tol, "classification tolerance")->capture_default_str();
  app.add_option("--time-samples", g.time_samples, "time samples for sweeps")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "seed for randomized sampling")->capture_default_str();
  app.add_option("--out", g.out_file, "report output file (JSON; stdout when omitted)");
  app.add_option("--samples", g.samples_file, "path samples output file (JSONL)");
  app.require_subcommand(1);

  std::string map_src, builtin, family_spec, subdivide = "auto";
  double eps_value = 0.0;
  bool auto_eps = false;
  double reeb_time = 1.0;

  auto add_map_opts = [&](CLI::App* cmd) {
    cmd->add_option("--map", map_src, "map source \"(ex, ey, ez)\" over x, y, z");
    cmd->add_option("--builtin", builtin, "builtin map, e.g. reeb:0.2, bumpy:0.1");
    cmd->add_option("--eps", eps_value, "conjugation translation length");
    cmd->add_flag("--auto-eps", auto_eps, "pick eps from the ladder {1, 1/2, ...}");
  };

  CLI::App* c_fact = app.add_subcommand("factorize", "horizontal five-factor factorization");
  add_map_opts(c_fact);
  CLI::App* c_null = app.add_subcommand("null-path", "null path from id to the given map");
  add_map_opts(c_null);
  CLI::App* c_pos = app.add_subcommand("positive-path", "positive path from id to the given map");
  add_map_opts(c_pos);
  c_pos->add_option("--reeb-time", reeb_time, "Reeb factor duration T")->capture_default_str();

  CLI::App* c_conn = app.add_subcommand("connect", "null chain across a time-indexed family");
  c_conn->add_option("--family", family_spec, "builtin family, e.g. reeb:2, tanhham:1")
      ->required();
  c_conn->add_option("--subdivide", subdivide, "subdivision count or 'auto'")
      ->capture_default_str();
  c_conn->add_option("--eps", eps_value, "conjugation translation length");
  c_conn->add_flag("--auto-eps", auto_eps, "pick eps per increment");

  std::string hamiltonian_spec = "plateau", bump_height = "auto";
  double k0 = 1.0;
  int ext_grid = 21, ext_times = 64;
  CLI::App* c_ext = app.add_subcommand("extend", "positivity extension pipeline");
  c_ext->add_option("--hamiltonian", hamiltonian_spec,
                    "contact Hamiltonian of the input family (builtin name or expression)")
      ->capture_default_str();
  c_ext->add_option("--k0", k0, "radius of the ball where positivity may fail")
      ->capture_default_str();
  c_ext->add_option("--bump-height", bump_height, "bump plateau height or 'auto'")
      ->capture_default_str();
  c_ext->add_option("--verify-grid", ext_grid, "verification grid per axis")
      ->capture_default_str();
  c_ext->add_option("--verify-time-samples", ext_times, "verification time samples")
      ->capture_default_str();

  std::string jet_src = "y^2 / 2", path_from, iso_out;
  double jet_y0 = -1.0, jet_y1 = 1.0;
  int jet_count = 21;
  CLI::App* c_leg = app.add_subcommand("legendrian", "transport a 1-jet Legendrian along a path");
  c_leg->add_option("--jet", jet_src, "generator u(y) of the 1-jet")->capture_default_str();
  c_leg->add_option("--path-from", path_from, "report file whose recipe rebuilds the path");
  c_leg->add_option("--y0", jet_y0, "parameter interval start")->capture_default_str();
  c_leg->add_option("--y1", jet_y1, "parameter interval end")->capture_default_str();
  c_leg->add_option("--count", jet_count, "parameter samples")->capture_default_str();
  c_leg->add_option("--isotopy-out", iso_out, "isotopy samples output file (JSONL)");

  std::string path_file, target_src, expect;
  CLI::App* c_ver = app.add_subcommand("verify", "re-verify serialized path samples");
  c_ver->add_option("--path", path_file, "path samples JSONL file")->required();
  c_ver->add_option("--target", target_src, "target map for the endpoint check");
  c_ver->add_option("--expect", expect, "expected verdict (default: the file header's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const bool eps_given = c_fact->count("--eps") || c_null->count("--eps") ||
                         c_pos->count("--eps") || c_conn->count("--eps");
  if (eps_given && auto_eps) {
    std::cerr << "error: give either --eps or --auto-eps, not both\n";
    return 2;
  }
  std::optional<double> eps;
  if (eps_given) eps = eps_value;

  try {
    if (c_fact->parsed()) return run_factorize(g, map_src, builtin, eps);
    if (c_null->parsed()) return run_null_path(g, map_src, builtin, eps);
    if (c_pos->parsed()) return run_positive_path(g, map_src, builtin, eps, reeb_time);
    if (c_conn->parsed()) return run_connect(g, family_spec, subdivide, eps);
    if (c_ext->parsed())
      return run_extend(g, hamiltonian_spec, k0, bump_height, ext_grid, ext_times);
    if (c_leg->parsed())
      return run_legendrian(g, jet_src, path_from, jet_y0, jet_y1, jet_count, iso_out);
    if (c_ver->parsed()) return run_verify(g, path_file, target_src, expect);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
