#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "csteer/geometry.hpp"
#include "csteer/paths.hpp"
#include "csteer/scalar_field.hpp"

namespace csteer {

/// A sampled Legendrian curve in J^1(R) = R^3: points with tangents satisfying
/// alpha(tangent) = 0 at every sample.
struct LegendrianSample {
  std::vector<Point> points;
  std::vector<Tangent> tangents;
  std::vector<double> params;
};

/// The 1-jet of u under the convention alpha = dz + x dy: the graph
///   y -> (-u'(y), y, u(y)),  tangent (-u''(y), 1, u'(y)),
/// which satisfies alpha(tangent) = u' + x = u' - u' = 0 identically.
inline LegendrianSample jet_legendrian(const ScalarField1D& u, double y0, double y1, int count) {
  if (count < 2) throw ConfigError("jet_legendrian needs at least 2 samples");
  LegendrianSample L;
  L.points.reserve(count);
  L.tangents.reserve(count);
  L.params.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double y = y0 + (y1 - y0) * i / (count - 1);
    const double uy = u.value(y), d1 = u.d1(y), d2 = u.d2(y);
    const Point p{-d1, y, uy};
    L.points.push_back(p);
    L.tangents.push_back({p, {-d2, 1.0, d1}});
    L.params.push_back(y);
  }
  return L;
}

inline double legendrian_deviation(const LegendrianSample& L) {
  double worst = 0.0;
  for (const Tangent& t : L.tangents) worst = std::max(worst, std::fabs(alpha_eval(t)));
  return worst;
}

/// The image of a Legendrian under a path of diffeomorphisms: per (time,
/// point) the transported point, the transverse velocity with its alpha, and
/// the transported tangent (by the exact slice Jacobian).
struct IsotopySample {
  std::vector<double> times;
  std::vector<double> params;
  std::vector<LegendrianSample> frames;           // one per time
  std::vector<VelocitySample> velocities;         // time-major, one per (time, point)
  double min_alpha = 0.0, max_alpha = 0.0, max_abs_alpha = 0.0;
  double max_tangent_alpha = 0.0;  // Legendrian deviation after transport
  bool all_closed_form = true;
};

inline IsotopySample transport(const LegendrianSample& L, const DiffeoPath& path,
                               int time_samples = 32) {
  IsotopySample iso;
  iso.times = uniform_times(time_samples);
  iso.params = L.params;
  iso.min_alpha = std::numeric_limits<double>::infinity();
  iso.max_alpha = -std::numeric_limits<double>::infinity();
  iso.velocities = velocity_sweep(path, iso.times, L.points);
  for (std::size_t it = 0; it < iso.times.size(); ++it) {
    const DiffeoSpec slice = path_slice(path, iso.times[it]);
    LegendrianSample frame;
    frame.params = L.params;
    frame.points.reserve(L.points.size());
    frame.tangents.reserve(L.points.size());
    for (std::size_t ip = 0; ip < L.points.size(); ++ip) {
      const Point q = slice(L.points[ip]);
      const Vec3 tv = slice.jacobian(L.points[ip]) * L.tangents[ip].vec;
      frame.points.push_back(q);
      frame.tangents.push_back({q, tv});
      iso.max_tangent_alpha = std::max(iso.max_tangent_alpha, std::fabs(alpha_eval(q, tv)));
      const VelocitySample& v = iso.velocities[it * L.points.size() + ip];
      iso.min_alpha = std::min(iso.min_alpha, v.alpha);
      iso.max_alpha = std::max(iso.max_alpha, v.alpha);
      iso.max_abs_alpha = std::max(iso.max_abs_alpha, std::fabs(v.alpha));
      if (v.exactness != Exactness::ClosedForm) iso.all_closed_form = false;
    }
    iso.frames.push_back(std::move(frame));
  }
  return iso;
}

/// Pointwise verdict aggregation, same logic as path classification: null iff
/// max |alpha| <= tol, positive iff the interior min exceeds tol,
/// non-negative iff min >= -tol, else mixed.
inline Verdict isotopy_classify(const IsotopySample& iso, double tol = 1e-9) {
  if (iso.max_abs_alpha <= tol) return Verdict::Null;
  double interior_min = std::numeric_limits<double>::infinity();
  const std::size_t npts = iso.params.size();
  for (std::size_t it = 1; it + 1 < iso.times.size(); ++it)
    for (std::size_t ip = 0; ip < npts; ++ip)
      interior_min = std::min(interior_min, iso.velocities[it * npts + ip].alpha);
  if (interior_min > tol) return Verdict::Positive;
  if (iso.min_alpha >= -tol) return Verdict::NonNegative;
  return Verdict::Mixed;
}

}  // namespace csteer
