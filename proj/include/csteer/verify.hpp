#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csteer/geometry.hpp"
#include "csteer/grid.hpp"
#include "csteer/legendrian.hpp"
#include "csteer/paths.hpp"
#include "csteer/synthesis.hpp"

namespace csteer {

using json = nlohmann::ordered_json;

inline constexpr int kPathSchemaVersion = 1;

struct VerifyConfig {
  GridSpec grid{Box::cube(1.0), 7};
  double tol = 1e-9;
  int time_samples = 32;
  std::uint64_t seed = 0;
};

/// Grid-sampled certificate for a path: classification extremes with argmin
/// location, Hofer length, endpoint accuracy against an optional target, and
/// the run metadata that makes the report reproducible.
struct VerificationReport {
  std::string label;
  Verdict verdict = Verdict::Mixed;
  ClassifyResult stats;
  double hofer = 0.0;
  std::optional<double> endpoint_sup_error;
  std::optional<FarFieldReport> far_field;
  VerifyConfig config;
};

inline VerificationReport verify(const DiffeoPath& path, const DiffeoSpec* target,
                                 const VerifyConfig& cfg) {
  VerificationReport rep;
  rep.label = path.label;
  rep.config = cfg;
  rep.stats = classify(path, cfg.grid, cfg.tol, cfg.time_samples);
  rep.verdict = rep.stats.verdict;
  rep.hofer = hofer_length(path, cfg.grid, cfg.time_samples);
  if (target) rep.endpoint_sup_error = endpoint_error(path, *target, cfg.grid);
  return rep;
}

inline json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline json grid_to_json(const GridSpec& g) {
  json j;
  j["lo"] = vec_to_json(g.box.lo);
  j["hi"] = vec_to_json(g.box.hi);
  j["n"] = g.n;
  return j;
}

inline json classify_to_json(const ClassifyResult& c) {
  json j;
  j["verdict"] = verdict_name(c.verdict);
  j["min_alpha"] = c.min_alpha;
  j["max_alpha"] = c.max_alpha;
  j["max_abs_alpha"] = c.max_abs_alpha;
  j["mean_alpha"] = c.mean_alpha;
  j["interior_min_alpha"] = c.interior_min_alpha;
  j["argmin_t"] = c.argmin_t;
  j["argmin_point"] = vec_to_json(c.argmin_point);
  j["all_closed_form"] = c.all_closed_form;
  j["samples"] = c.samples;
  return j;
}

inline json far_field_to_json(const FarFieldReport& r) {
  json j;
  j["shell_sup_displacement"] = r.shell_sup_displacement;
  j["shell_sup_jacobian_dev"] = r.shell_sup_jacobian_dev;
  j["inner_sup_displacement"] = r.inner_sup_displacement;
  j["per_time_displacement"] = r.per_time_displacement;
  j["per_time_jacobian_dev"] = r.per_time_jacobian_dev;
  return j;
}

inline json report_to_json(const VerificationReport& rep) {
  json j;
  j["schema"] = "csteer-report";
  j["version"] = kPathSchemaVersion;
  j["label"] = rep.label;
  j["verdict"] = verdict_name(rep.verdict);
  j["classification"] = classify_to_json(rep.stats);
  j["hofer_length"] = rep.hofer;
  if (rep.endpoint_sup_error) j["endpoint_sup_error"] = *rep.endpoint_sup_error;
  if (rep.far_field) j["far_field"] = far_field_to_json(*rep.far_field);
  json meta;
  meta["grid"] = grid_to_json(rep.config.grid);
  meta["time_samples"] = rep.config.time_samples;
  meta["tol"] = rep.config.tol;
  meta["seed"] = rep.config.seed;
  j["config"] = meta;
  return j;
}

// --- JSONL path samples: one record per (t, seed point) ---

inline json sample_to_json(const VelocitySample& v) {
  json j;
  j["type"] = "sample";
  j["t"] = v.t;
  j["p"] = vec_to_json(v.seed);
  j["image"] = vec_to_json(v.image);
  j["velocity"] = vec_to_json(v.vec);
  j["alpha"] = v.alpha;
  j["exactness"] = v.exactness == Exactness::ClosedForm ? "closed-form" : "finite-difference";
  return j;
}

inline void write_path_jsonl(std::ostream& os, const DiffeoPath& path, const VerifyConfig& cfg,
                             Verdict verdict) {
  json header;
  header["type"] = "header";
  header["schema"] = "csteer-path-samples";
  header["version"] = kPathSchemaVersion;
  header["label"] = path.label;
  header["verdict"] = verdict_name(verdict);
  header["grid"] = grid_to_json(cfg.grid);
  header["time_samples"] = cfg.time_samples;
  header["tol"] = cfg.tol;
  os << header.dump() << "\n";
  const std::vector<double> times = uniform_times(cfg.time_samples);
  const std::vector<Point> pts = cfg.grid.points();
  const auto sweep = velocity_sweep(path, times, pts);
  for (const auto& v : sweep) os << sample_to_json(v).dump() << "\n";
}

struct PathSamples {
  json header;
  std::vector<VelocitySample> samples;
};

inline PathSamples read_path_jsonl(std::istream& is) {
  PathSamples out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string type = j.value("type", "sample");
    if (type == "header") {
      out.header = j;
      continue;
    }
    VelocitySample v;
    v.t = j.at("t").get<double>();
    v.seed = vec_from_json(j.at("p"));
    v.image = vec_from_json(j.at("image"));
    v.vec = vec_from_json(j.at("velocity"));
    v.alpha = j.at("alpha").get<double>();
    v.exactness =
        j.value("exactness", "closed-form") == std::string("closed-form")
            ? Exactness::ClosedForm
            : Exactness::FiniteDifference;
    out.samples.push_back(v);
  }
  return out;
}

/// Re-verification of serialized samples: verdict from recorded alphas,
/// endpoint error from the t = 1 records against an optional target map,
/// Hofer length by trapezoid over the recorded time levels.
struct SampleVerification {
  Verdict verdict = Verdict::Mixed;
  double min_alpha = 0.0, max_alpha = 0.0, max_abs_alpha = 0.0, interior_min_alpha = 0.0;
  double hofer = 0.0;
  std::optional<double> endpoint_sup_error;
};

inline SampleVerification verify_samples(const std::vector<VelocitySample>& samples,
                                         const DiffeoSpec* target, double tol) {
  if (samples.empty()) throw ConfigError("no samples to verify");
  SampleVerification out;
  // records need not arrive time-major: collect the distinct levels
  std::vector<double> times;
  for (const auto& v : samples) times.push_back(v.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const double t_max = times.back();

  out.min_alpha = std::numeric_limits<double>::infinity();
  out.interior_min_alpha = std::numeric_limits<double>::infinity();
  out.max_alpha = -std::numeric_limits<double>::infinity();
  std::vector<double> level_max(times.size(), 0.0);
  double endpoint = 0.0;
  bool saw_endpoint = false;
  for (const auto& v : samples) {
    out.min_alpha = std::min(out.min_alpha, v.alpha);
    out.max_alpha = std::max(out.max_alpha, v.alpha);
    out.max_abs_alpha = std::max(out.max_abs_alpha, std::fabs(v.alpha));
    if (v.t > 0.0 && v.t < t_max) out.interior_min_alpha = std::min(out.interior_min_alpha, v.alpha);
    for (std::size_t i = 0; i < times.size(); ++i)
      if (times[i] == v.t) level_max[i] = std::max(level_max[i], std::fabs(v.alpha));
    if (target && v.t == t_max) {
      endpoint = std::max(endpoint, ((*target)(v.seed) - v.image).norm());
      saw_endpoint = true;
    }
  }
  for (std::size_t i = 1; i < times.size(); ++i)
    out.hofer += 0.5 * (level_max[i - 1] + level_max[i]) * (times[i] - times[i - 1]);
  if (saw_endpoint) out.endpoint_sup_error = endpoint;

  if (out.max_abs_alpha <= tol)
    out.verdict = Verdict::Null;
  else if (out.interior_min_alpha > tol)
    out.verdict = Verdict::Positive;
  else if (out.min_alpha >= -tol)
    out.verdict = Verdict::NonNegative;
  else
    out.verdict = Verdict::Mixed;
  return out;
}

// --- JSONL isotopy samples: one record per (t, parameter) ---

inline void write_isotopy_jsonl(std::ostream& os, const IsotopySample& iso,
                                const std::string& label) {
  json header;
  header["type"] = "header";
  header["schema"] = "csteer-isotopy-samples";
  header["version"] = kPathSchemaVersion;
  header["label"] = label;
  header["min_alpha"] = iso.min_alpha;
  header["max_alpha"] = iso.max_alpha;
  header["max_tangent_alpha"] = iso.max_tangent_alpha;
  os << header.dump() << "\n";
  const std::size_t npts = iso.params.size();
  for (std::size_t it = 0; it < iso.times.size(); ++it) {
    for (std::size_t ip = 0; ip < npts; ++ip) {
      const VelocitySample& v = iso.velocities[it * npts + ip];
      json j;
      j["type"] = "sample";
      j["t"] = iso.times[it];
      j["parameter"] = iso.params[ip];
      j["point"] = vec_to_json(iso.frames[it].points[ip]);
      j["velocity"] = vec_to_json(v.vec);
      j["alpha"] = v.alpha;
      os << j.dump() << "\n";
    }
  }
}

}  // namespace csteer
