#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "csteer/contact.hpp"
#include "csteer/diffeo.hpp"
#include "csteer/geometry.hpp"
#include "csteer/grid.hpp"
#include "csteer/integrate.hpp"
#include "csteer/ramp.hpp"

namespace csteer {

/// A field a path segment can flow along: a closed-form frame field or an
/// RK4-integrated field (the localized conjugator). Integrated fields carry a
/// fixed step count so the flow is smooth in its time argument. Both kinds are
/// horizontal in null segments, so alpha of reparametrized flows vanishes
/// exactly.
struct FlowSegmentField {
  VectorField field;
  int n_steps = 16;
};

inline FlowSegmentField make_flow_segment_field(VectorField f, double reference_time,
                                                double step) {
  return {std::move(f), std::max(1, rk4_step_count(reference_time, step))};
}

using SegmentField = std::variant<FrameFieldId, FlowSegmentField>;

inline Point segment_flow_point(const SegmentField& f, double t, const Point& p) {
  if (std::holds_alternative<FrameFieldId>(f))
    return flow_closed_form(std::get<FrameFieldId>(f), t, p);
  const auto& ff = std::get<FlowSegmentField>(f);
  return rk4_flow_n(ff.field, t, p, ff.n_steps);
}

inline Mat3 segment_flow_jacobian(const SegmentField& f, double t, const Point& p) {
  if (std::holds_alternative<FrameFieldId>(f))
    return flow_closed_form_jacobian(std::get<FrameFieldId>(f), t, p);
  const auto& ff = std::get<FlowSegmentField>(f);
  return rk4_flow_with_jacobian_n(ff.field, t, p, ff.n_steps).second;
}

/// The field vector at a point (d/dt of the flow through that point).
inline Vec3 segment_field_vector(const SegmentField& f, const Point& p) {
  if (std::holds_alternative<FrameFieldId>(f))
    return frame_eval(std::get<FrameFieldId>(f), p).vec;
  return std::get<FlowSegmentField>(f).field.value(p);
}

inline std::string segment_field_name(const SegmentField& f) {
  if (std::holds_alternative<FrameFieldId>(f)) return std::get<FrameFieldId>(f).name();
  return std::get<FlowSegmentField>(f).field.label;
}

/// Segment cores.
///
/// ReparamFlow traces p -> phi^field_{sigma(s) a(p)}(base(p)): the amplitude is
/// evaluated at the segment's source point, which is how reparametrized flows
/// compose under right translation without any point inversion. Hamiltonian
/// traces the X_h flow over time sigma(s) * duration after base; Stationary
/// holds a fixed map.
struct ReparamFlowCore {
  SegmentField field;
  ScalarField amplitude;
};

struct HamiltonianCore {
  ScalarField h;
  double duration = 1.0;
  double step = 1.0 / 64;
};

struct StationaryCore {
  DiffeoSpec held;
};

using SegmentCore = std::variant<ReparamFlowCore, HamiltonianCore, StationaryCore>;

struct PathSegment {
  SegmentCore core;
  DiffeoSpec base;  // accumulated predecessor composition, applied before the core
  double t0 = 0.0, t1 = 1.0;
  WarpKind warp = WarpKind::FlatCinf;
};

/// The diffeomorphism a segment traces at warped clock sigma in [0,1],
/// including its base map.
inline DiffeoSpec segment_slice(const PathSegment& seg, double sigma) {
  if (std::holds_alternative<ReparamFlowCore>(seg.core)) {
    const auto& rc = std::get<ReparamFlowCore>(seg.core);
    const SegmentField field = rc.field;
    const ScalarField amp = rc.amplitude;
    const DiffeoSpec base = seg.base;
    return DiffeoSpec::custom(
        [field, amp, base, sigma](const Point& p) {
          return segment_flow_point(field, sigma * amp.value(p), base(p));
        },
        [field, amp, base, sigma](const Point& p) {
          const double t = sigma * amp.value(p);
          const Point w = base(p);
          Mat3 J = segment_flow_jacobian(field, t, w) * base.jacobian(p);
          if (amp.has_grad()) {
            const Point q = segment_flow_point(field, t, w);
            J = J + Mat3::outer(segment_field_vector(field, q), amp.gradient(p) * sigma);
          }
          return J;
        },
        "reparam[" + segment_field_name(field) + "," + amp.label + "]@" +
            detail::format_number(sigma));
  }
  if (std::holds_alternative<HamiltonianCore>(seg.core)) {
    const auto& hc = std::get<HamiltonianCore>(seg.core);
    const DiffeoSpec flow = DiffeoSpec::hamiltonian_slice(hc.h, sigma * hc.duration, hc.step);
    return seg.base.is_identity() ? flow : DiffeoSpec::compose({flow, seg.base});
  }
  const DiffeoSpec& held = std::get<StationaryCore>(seg.core).held;
  return seg.base.is_identity() ? held : DiffeoSpec::compose({held, seg.base});
}

/// A general fixed time-family of maps (raw inputs; the extension pipeline's
/// left factor). `increment` optionally supplies f_tb o f_ta^{-1} in a cheaper
/// or exact form than composing with a Newton-backed inverse.
struct DiffeoFamily {
  std::function<DiffeoSpec(double)> at;
  std::string label;
  std::function<DiffeoSpec(double, double)> increment;
};

/// A time-parametrized family of diffeomorphisms on [0,1]: ordered segments
/// whose intervals partition [0,1], an optional exact left Reeb clock
/// (slice t = ReebTime(t * reeb_rate) o inner(t)), an optional general left
/// family, and a global right translation factor.
struct DiffeoPath {
  std::vector<PathSegment> segments;
  double reeb_rate = 0.0;
  std::optional<DiffeoFamily> left_family;
  DiffeoSpec right_factor;
  Box box = Box::cube(1.0);
  std::string label;

  bool has_left_family() const { return left_family.has_value(); }
};

namespace detail {

inline std::size_t segment_index(const DiffeoPath& path, double t) {
  for (std::size_t k = 0; k < path.segments.size(); ++k)
    if (t <= path.segments[k].t1 || k + 1 == path.segments.size()) return k;
  return path.segments.size() - 1;
}

inline double local_clock(const PathSegment& seg, double t) {
  const double span = seg.t1 - seg.t0;
  return span > 0.0 ? (t - seg.t0) / span : 1.0;
}

}  // namespace detail

/// The diffeomorphism traced at global time t in [0,1].
inline DiffeoSpec path_slice(const DiffeoPath& path, double t) {
  if (path.segments.empty()) throw ConfigError("path has no segments");
  const std::size_t k = detail::segment_index(path, t);
  const PathSegment& seg = path.segments[k];
  const double sigma = warp_sigma(seg.warp, detail::local_clock(seg, t));
  std::vector<DiffeoSpec> chain;
  if (path.left_family) chain.push_back(path.left_family->at(t));
  if (path.reeb_rate != 0.0) chain.push_back(DiffeoSpec::reeb_time(t * path.reeb_rate));
  chain.push_back(segment_slice(seg, sigma));
  if (!path.right_factor.is_identity()) chain.push_back(path.right_factor);
  return DiffeoSpec::compose(std::move(chain));
}

inline DiffeoSpec path_start(const DiffeoPath& path) { return path_slice(path, 0.0); }
inline DiffeoSpec path_end(const DiffeoPath& path) { return path_slice(path, 1.0); }

enum class Exactness { ClosedForm, FiniteDifference };

/// One sample of the generating time-dependent vector field: the velocity at
/// the image q of seed p at time t, with alpha = alpha_eval(q, vec).
struct VelocitySample {
  double t = 0.0;
  Point seed;
  Point image;
  Vec3 vec;
  double alpha = 0.0;
  Exactness exactness = Exactness::ClosedForm;
};

inline constexpr double kVelocityFdStep = 1e-5;

namespace detail {

inline VelocitySample exact_velocity(const DiffeoPath& path, std::size_t k, double t,
                                     const Point& p) {
  const PathSegment& seg = path.segments[k];
  const double s = local_clock(seg, t);
  const double span = seg.t1 - seg.t0;
  const Point w = path.right_factor.is_identity() ? p : path.right_factor(p);
  VelocitySample out;
  out.t = t;
  out.seed = p;
  Vec3 v{};
  Point q;
  if (std::holds_alternative<ReparamFlowCore>(seg.core)) {
    const auto& rc = std::get<ReparamFlowCore>(seg.core);
    const double a = rc.amplitude.value(w);
    q = segment_flow_point(rc.field, warp_sigma(seg.warp, s) * a, seg.base(w));
    const double rate = span > 0.0 ? warp_dsigma(seg.warp, s) * a / span : 0.0;
    v = segment_field_vector(rc.field, q) * rate;
  } else {
    q = std::get<StationaryCore>(seg.core).held(seg.base(w));
  }
  // alpha of the horizontal part first: exactly zero for X/Y/cutoff fields,
  // so the Reeb clock's contribution enters without cancellation noise
  double alpha = alpha_eval(q, v);
  if (path.reeb_rate != 0.0) {
    q.z += t * path.reeb_rate;
    v.z += path.reeb_rate;
    alpha += path.reeb_rate;
  }
  out.image = q;
  out.vec = v;
  out.alpha = alpha;
  out.exactness = Exactness::ClosedForm;
  return out;
}

}  // namespace detail

/// Velocity of the path at (t, p). ReparamFlow and Stationary segments (plus
/// the exact Reeb clock) give the closed form sigma'(s) a(p) field(q); paths
/// with a Hamiltonian segment at t or a general left family fall back to
/// central finite differences of the slice map, transported to image space.
inline VelocitySample velocity(const DiffeoPath& path, double t, const Point& p) {
  if (path.segments.empty()) throw ConfigError("path has no segments");
  const std::size_t k = detail::segment_index(path, t);
  const bool exact =
      !path.has_left_family() && !std::holds_alternative<HamiltonianCore>(path.segments[k].core);
  if (exact) return detail::exact_velocity(path, k, t, p);

  const double h = kVelocityFdStep;
  const double lo = std::max(0.0, t - h), hi = std::min(1.0, t + h);
  const Point a = path_slice(path, lo)(p);
  const Point b = path_slice(path, hi)(p);
  VelocitySample out;
  out.t = t;
  out.seed = p;
  out.image = (a + b) * 0.5;
  out.vec = (b - a) * (1.0 / (hi - lo));
  out.alpha = alpha_eval(out.image, out.vec);
  out.exactness = Exactness::FiniteDifference;
  return out;
}

/// Full sweep over a time grid x point set; time-major order. Slices for
/// finite-difference segments are constructed once per time sample.
inline std::vector<VelocitySample> velocity_sweep(const DiffeoPath& path,
                                                  const std::vector<double>& times,
                                                  const std::vector<Point>& points) {
  std::vector<VelocitySample> out(times.size() * points.size());
  for (std::size_t it = 0; it < times.size(); ++it) {
    const double t = times[it];
    const std::size_t k = detail::segment_index(path, t);
    const bool exact =
        !path.has_left_family() && !std::holds_alternative<HamiltonianCore>(path.segments[k].core);
    if (exact) {
      parallel_for(points.size(), [&](std::size_t ip) {
        out[it * points.size() + ip] = detail::exact_velocity(path, k, t, points[ip]);
      });
    } else {
      const double h = kVelocityFdStep;
      const double lo = std::max(0.0, t - h), hi = std::min(1.0, t + h);
      const DiffeoSpec sl = path_slice(path, lo);
      const DiffeoSpec sh = path_slice(path, hi);
      parallel_for(points.size(), [&](std::size_t ip) {
        const Point& p = points[ip];
        VelocitySample v;
        v.t = t;
        v.seed = p;
        const Point a = sl(p), b = sh(p);
        v.image = (a + b) * 0.5;
        v.vec = (b - a) * (1.0 / (hi - lo));
        v.alpha = alpha_eval(v.image, v.vec);
        v.exactness = Exactness::FiniteDifference;
        out[it * points.size() + ip] = v;
      });
    }
  }
  return out;
}

inline std::vector<double> uniform_times(int samples) {
  if (samples < 1) throw ConfigError("time sampling needs at least one interval");
  std::vector<double> t(samples + 1);
  for (int i = 0; i <= samples; ++i) t[i] = static_cast<double>(i) / samples;
  return t;
}

/// Hofer length: composite trapezoid in t of the grid max of |alpha|.
inline double hofer_length(const DiffeoPath& path, const GridSpec& grid, int time_samples = 64) {
  const std::vector<double> times = uniform_times(time_samples);
  const std::vector<Point> pts = grid.points();
  const auto sweep = velocity_sweep(path, times, pts);
  double total = 0.0;
  double prev = 0.0;
  for (std::size_t it = 0; it < times.size(); ++it) {
    double m = 0.0;
    for (std::size_t ip = 0; ip < pts.size(); ++ip)
      m = std::max(m, std::fabs(sweep[it * pts.size() + ip].alpha));
    if (it > 0) total += 0.5 * (prev + m) * (times[it] - times[it - 1]);
    prev = m;
  }
  return total;
}

enum class Verdict { Null, Positive, NonNegative, Mixed };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Null: return "null";
    case Verdict::Positive: return "positive";
    case Verdict::NonNegative: return "non-negative";
    case Verdict::Mixed: return "mixed";
  }
  return "?";
}

struct ClassifyResult {
  Verdict verdict = Verdict::Mixed;
  double min_alpha = 0.0;
  double max_alpha = 0.0;
  double max_abs_alpha = 0.0;
  double mean_alpha = 0.0;
  double interior_min_alpha = 0.0;  // min over samples with 0 < t < 1
  double argmin_t = 0.0;
  Point argmin_point{};
  bool all_closed_form = true;
  std::size_t samples = 0;
};

/// Classification per the alpha sign conventions: null iff max |alpha| <= tol,
/// positive iff the interior min exceeds tol, non-negative iff min >= -tol,
/// otherwise mixed. Closed-form segments produce exact alphas, so null
/// verdicts for synthesized paths do not lean on the tolerance.
inline ClassifyResult classify_samples(const std::vector<VelocitySample>& sweep,
                                       std::size_t n_times, std::size_t n_points, double tol) {
  ClassifyResult r;
  r.min_alpha = std::numeric_limits<double>::infinity();
  r.interior_min_alpha = std::numeric_limits<double>::infinity();
  r.max_alpha = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t it = 0; it < n_times; ++it) {
    const bool interior = it > 0 && it + 1 < n_times;
    for (std::size_t ip = 0; ip < n_points; ++ip) {
      const VelocitySample& v = sweep[it * n_points + ip];
      sum += v.alpha;
      if (v.alpha < r.min_alpha) {
        r.min_alpha = v.alpha;
        r.argmin_t = v.t;
        r.argmin_point = v.seed;
      }
      r.max_alpha = std::max(r.max_alpha, v.alpha);
      r.max_abs_alpha = std::max(r.max_abs_alpha, std::fabs(v.alpha));
      if (interior) r.interior_min_alpha = std::min(r.interior_min_alpha, v.alpha);
      if (v.exactness != Exactness::ClosedForm) r.all_closed_form = false;
    }
  }
  r.samples = sweep.size();
  r.mean_alpha = sum / static_cast<double>(sweep.size());
  if (r.max_abs_alpha <= tol)
    r.verdict = Verdict::Null;
  else if (r.interior_min_alpha > tol)
    r.verdict = Verdict::Positive;
  else if (r.min_alpha >= -tol)
    r.verdict = Verdict::NonNegative;
  else
    r.verdict = Verdict::Mixed;
  return r;
}

inline ClassifyResult classify(const DiffeoPath& path, const GridSpec& grid, double tol = 1e-9,
                               int time_samples = 32) {
  const std::vector<double> times = uniform_times(time_samples);
  const std::vector<Point> pts = grid.points();
  const auto sweep = velocity_sweep(path, times, pts);
  return classify_samples(sweep, times.size(), pts.size(), tol);
}

/// Right translation: every time slice post-composed with a fixed map. The
/// generating velocity field at matching image points is unchanged.
inline DiffeoPath right_translate(DiffeoPath path, const DiffeoSpec& c) {
  if (c.is_identity()) return path;
  path.right_factor = path.right_factor.is_identity()
                          ? c
                          : DiffeoSpec::compose({path.right_factor, c});
  path.label += " . " + c.describe();
  return path;
}

namespace detail {

inline ScalarField compose_field_with_map(const ScalarField& a, const DiffeoSpec& c) {
  ScalarField out;
  out.label = a.label + " o " + c.describe();
  out.value = [a, c](const Point& p) { return a.value(c(p)); };
  if (a.has_grad())
    out.grad = [a, c](const Point& p) { return c.jacobian(p).transpose() * a.gradient(c(p)); };
  return out;
}

/// Fold a path's global right factor into its segments (used by concat).
inline PathSegment absorb_right(PathSegment seg, const DiffeoSpec& c) {
  if (c.is_identity()) return seg;
  seg.base = seg.base.is_identity() ? c : DiffeoSpec::compose({seg.base, c});
  if (std::holds_alternative<ReparamFlowCore>(seg.core)) {
    auto& rc = std::get<ReparamFlowCore>(seg.core);
    rc.amplitude = compose_field_with_map(rc.amplitude, c);
  }
  return seg;
}

}  // namespace detail

/// Smooth concatenation. Preconditions: all inputs are segment-built (no left
/// factors) and path k ends where path k+1 starts as maps, within
/// `junction_tol` on a coarse grid of the first path's box.
inline DiffeoPath concat(const std::vector<DiffeoPath>& paths, double junction_tol = 1e-9) {
  if (paths.empty()) throw ConfigError("concat of zero paths");
  for (const auto& p : paths)
    if (p.has_left_family() || p.reeb_rate != 0.0)
      throw ConfigError("concat requires segment-built paths without left factors");
  if (paths.size() == 1) return paths.front();

  const GridSpec probe{paths.front().box, 5};
  const auto probe_pts = probe.points();
  for (std::size_t k = 0; k + 1 < paths.size(); ++k) {
    const DiffeoSpec end = path_end(paths[k]);
    const DiffeoSpec start = path_start(paths[k + 1]);
    double sup = 0.0;
    for (const Point& p : probe_pts) sup = std::max(sup, (end(p) - start(p)).norm());
    if (sup > junction_tol)
      throw JunctionMismatch("paths " + std::to_string(k) + " and " + std::to_string(k + 1) +
                                 " disagree at the junction by " + detail::format_number(sup),
                             sup);
  }

  DiffeoPath out;
  out.box = paths.front().box;
  out.label = "concat";
  const double share = 1.0 / static_cast<double>(paths.size());
  for (std::size_t k = 0; k < paths.size(); ++k) {
    for (const PathSegment& seg : paths[k].segments) {
      PathSegment s = detail::absorb_right(seg, paths[k].right_factor);
      s.t0 = (k + seg.t0) * share;
      s.t1 = (k + seg.t1) * share;
      out.segments.push_back(std::move(s));
    }
  }
  return out;
}

/// Incremental builder that accumulates each segment's base map so adjacent
/// segments agree exactly at junctions. Time intervals are assigned uniformly
/// by finish().
struct PathBuilder {
  DiffeoPath path;
  DiffeoSpec cursor;  // composed endpoint of everything added so far

  explicit PathBuilder(Box box = Box::cube(1.0), std::string label = {}) {
    path.box = box;
    path.label = std::move(label);
  }

  PathBuilder& add_reparam(SegmentField field, ScalarField amplitude,
                           WarpKind warp = WarpKind::FlatCinf) {
    PathSegment seg;
    seg.core = ReparamFlowCore{std::move(field), std::move(amplitude)};
    seg.warp = warp;
    seg.base = cursor;
    cursor = segment_slice(seg, 1.0);
    path.segments.push_back(std::move(seg));
    return *this;
  }

  PathBuilder& add_hamiltonian(ScalarField h, double duration, double step = 1.0 / 64,
                               WarpKind warp = WarpKind::Identity) {
    PathSegment seg;
    seg.core = HamiltonianCore{std::move(h), duration, step};
    seg.warp = warp;
    seg.base = cursor;
    cursor = segment_slice(seg, 1.0);
    path.segments.push_back(std::move(seg));
    return *this;
  }

  PathBuilder& add_stationary(DiffeoSpec held = DiffeoSpec::identity()) {
    PathSegment seg;
    seg.core = StationaryCore{std::move(held)};
    seg.warp = WarpKind::Identity;
    seg.base = cursor;
    cursor = segment_slice(seg, 1.0);
    path.segments.push_back(std::move(seg));
    return *this;
  }

  DiffeoPath finish() {
    if (path.segments.empty()) add_stationary();
    const double share = 1.0 / static_cast<double>(path.segments.size());
    for (std::size_t k = 0; k < path.segments.size(); ++k) {
      path.segments[k].t0 = k * share;
      path.segments[k].t1 = (k + 1) * share;
    }
    return path;
  }
};

/// Sup over the grid of |slice(1)(p) - target(p)|.
inline double endpoint_error(const DiffeoPath& path, const DiffeoSpec& target,
                             const GridSpec& grid) {
  const DiffeoSpec end = path_end(path);
  double sup = 0.0;
  for (const Point& p : grid.points()) sup = std::max(sup, (end(p) - target(p)).norm());
  return sup;
}

}  // namespace csteer
