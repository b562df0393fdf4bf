#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "csteer/diffeo.hpp"
#include "csteer/geometry.hpp"
#include "csteer/grid.hpp"
#include "csteer/paths.hpp"
#include "csteer/scalar_field.hpp"
#include "csteer/synthesis.hpp"

namespace csteer {

/// A path of contactomorphisms f_t (f_0 = id) that may fail positivity inside
/// the ball of radius k0, plus its contact Hamiltonian when known (recovered
/// by finite differences otherwise).
struct ContactPathInput {
  DiffeoFamily family;
  std::optional<ScalarField> hamiltonian;
  double k0 = 1.0;
};

/// alpha(X_t^f) at the image of p: the contact Hamiltonian of the family,
/// recovered from the finite-difference time derivative.
inline double contact_hamiltonian_of_path(const DiffeoFamily& family, double t, const Point& p) {
  const double h = kVelocityFdStep;
  const double lo = std::max(0.0, t - h), hi = std::min(1.0, t + h);
  const Point a = family.at(lo)(p);
  const Point b = family.at(hi)(p);
  return alpha_eval((a + b) * 0.5, (b - a) * (1.0 / (hi - lo)));
}

namespace detail {

inline double family_hamiltonian(const ContactPathInput& input, double t, const Point& p) {
  if (input.hamiltonian) return input.hamiltonian->value(p);
  return contact_hamiltonian_of_path(input.family, t, p);
}

}  // namespace detail

/// The constants and compact-set radii of the extension construction.
struct ExtensionParams {
  double k0 = 1.0;
  double k1 = 2.0;
  double k2 = 4.0;
  double k3 = 8.0;
  double k3_effective = 8.0;  // k3 enlarged to the conjugator support of psi
  double c1 = 0.0;            // min of H over the k1 ball and time grid
  double c2 = 1.0;            // max of the conformal family on the k1 ball
  double bump_height = 1.0;   // -c1 c2 + 1, then doubled on shortfall
  double integrator_step = 1.0 / 32;
};

struct ExtensionConfig {
  int verify_grid_n = 21;
  int verify_time_samples = 64;
  int coarse_grid_n = 7;
  int coarse_time_samples = 8;
  int factorize_grid_n = 7;
  double family_step = 1.0 / 32;
  double classify_tol = 1e-9;
  double far_field_tol = 1e-9;
  int height_doubling_cap = 10;
  int radius_doubling_cap = 5;
};

struct ExtensionResult {
  DiffeoPath path;
  ExtensionParams params;
  ClassifyResult classification;
  double far_field_sup = 0.0;        // sup |out_t - f_t| beyond k3_effective
  double containment_max_radius = 0.0;
  double endpoint_error_id = 0.0;    // |out_0 - id| on the k1 ball
  double endpoint_error_f1 = 0.0;    // |out_1 - f_1| on the k1 ball
  double input_min_h_inside = 0.0;   // min of H over the k1 region
  double shell_min_h = 0.0;          // min of H outside k0 (precondition)
  int subdivisions = 1;
  double eps = 0.0;
  bool trivial = false;
};

/// alpha along the output, evaluated through the conformal decomposition the
/// construction is built on: with g = phi o psi and psi exactly null,
///   alpha(X^{f o g}) at the image = H(f(w)) + rho_f(w) * h(w),  w = phi(psi(p)),
/// because f and phi preserve the contact hyperplanes and alpha(X^psi) = 0.
/// This is exact up to integrator accuracy, where a time difference quotient
/// would have to resolve a cancellation between components of size ~1/dt of
/// the raced subdivision clock.
inline ClassifyResult classify_extension_structural(const ContactPathInput& input,
                                                    const ScalarField& h, const DiffeoPath& psi,
                                                    double family_step, const GridSpec& grid,
                                                    int time_samples, double tol) {
  const std::vector<double> times = uniform_times(time_samples);
  const std::vector<Point> pts = grid.points();
  std::vector<VelocitySample> sweep(times.size() * pts.size());
  for (std::size_t it = 0; it < times.size(); ++it) {
    const double t = times[it];
    const DiffeoSpec psit = path_slice(psi, t);
    const VectorField phi_field = hamiltonian_field(h);
    const int phi_steps = rk4_step_count_smooth(t, family_step);
    const DiffeoSpec ft = input.family.at(t);
    parallel_for(pts.size(), [&](std::size_t ip) {
      const Point& p = pts[ip];
      const Point w = rk4_flow_n(phi_field, t, psit(p), phi_steps);
      const Mat3 Jf = ft.jacobian(w);
      const Point q = ft(w);
      const double rho = alpha_eval(q, Jf * Vec3{0, 0, 1});
      VelocitySample v;
      v.t = t;
      v.seed = p;
      v.image = q;
      v.alpha = detail::family_hamiltonian(input, t, q) + rho * h.value(w);
      v.exactness = Exactness::FiniteDifference;  // integrator-grade, not closed form
      sweep[it * pts.size() + ip] = v;
    });
  }
  return classify_samples(sweep, times.size(), pts.size(), tol);
}

/// The constants of the construction: k1 from the radius ladder so that
/// f_t^{-1}(k0-ball) stays inside, c1 the grid-time min of H, c2 the grid max
/// of the conformal factor on the k1 ball.
inline ExtensionParams compute_constants(const ContactPathInput& input,
                                         const ExtensionConfig& cfg = {}) {
  ExtensionParams par;
  par.k0 = input.k0;
  par.integrator_step = cfg.family_step;
  const std::vector<double> times = uniform_times(cfg.coarse_time_samples);

  const std::vector<Point> k0_pts = ball_points(input.k0, 5);
  double k1 = std::max(1.0, input.k0);
  for (int tries = 0;; ++tries) {
    if (tries > 20) throw ContainmentFailure("no ladder radius contains f_t^{-1}(K0)");
    double worst = 0.0;
    for (double t : times) {
      const DiffeoSpec inv = input.family.at(t).inverse();
      for (const Point& q : k0_pts) worst = std::max(worst, inv(q).norm());
    }
    if (worst <= k1) break;
    k1 *= 2.0;
  }
  par.k1 = k1;

  const std::vector<Point> k1_pts = ball_points(k1, cfg.coarse_grid_n);
  double c1 = std::numeric_limits<double>::infinity();
  double c2 = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    const DiffeoSpec ft = input.family.at(t);
    for (const Point& p : k1_pts) {
      c1 = std::min(c1, detail::family_hamiltonian(input, t, p));
      c2 = std::max(c2, conformal_factor(ft, p));
    }
  }
  par.c1 = c1;
  par.c2 = c2;
  par.k2 = 2.0 * k1;
  par.k3 = 2.0 * par.k2;
  par.k3_effective = par.k3;
  par.bump_height = c1 < 0.0 ? -c1 * c2 + 1.0 : 0.0;
  return par;
}

/// The full pipeline: bump Hamiltonian h supported in the k3 ball with
/// plateau -c1 c2 + 1 on k2, its contact flow phi_t, a compactly supported
/// null path psi_t from id to phi_{-1} (by subdivision of the flow family),
/// g_t = phi_t o psi_t, output f_t o g_t. Certifies positivity on the grid,
/// containment phi_t(psi_t(K1)) inside K2, and exact far-field agreement with
/// f_t beyond k3_effective. Heights double on PositivityShortfall, radii on
/// ContainmentFailure.
inline ExtensionResult extend_positive(const ContactPathInput& input,
                                       std::optional<ExtensionParams> given = std::nullopt,
                                       const ExtensionConfig& cfg = {}) {
  const std::vector<double> coarse_times = uniform_times(cfg.coarse_time_samples);

  // f_0 = id is assumed throughout the construction
  for (const Point& p : ball_points(input.k0, 3))
    if ((input.family.at(0.0)(p) - p).norm() > 1e-9)
      throw ConfigError("extension input must start at the identity");

  // the slices must preserve the contact hyperplanes: the whole pipeline
  // (conformal factors, the positivity decomposition) rides on this
  {
    const GridSpec probe{Box::cube(std::max(1.0, input.k0)), 3};
    for (double t : {0.5, 1.0}) {
      const double dev = kernel_deviation(input.family.at(t), probe);
      if (dev > 1e-6)
        throw ConfigError("extension input is not a path of contactomorphisms (kernel deviation " +
                          detail::format_number(dev) + " at t = " + detail::format_number(t) + ")");
    }
  }

  ExtensionResult res;

  // precondition: positive outside K0
  {
    const ShellSpec shell{input.k0, 2.0 * input.k0 + 1.0, 2 * cfg.coarse_grid_n + 1};
    double min_h = std::numeric_limits<double>::infinity();
    for (double t : coarse_times)
      for (const Point& p : shell.points())
        min_h = std::min(min_h, detail::family_hamiltonian(input, t, p));
    res.shell_min_h = min_h;
    if (min_h <= 0.0)
      throw PositivityShortfall("input family is not positive outside the K0 ball (min alpha " +
                                    detail::format_number(min_h) + ")",
                                min_h);
  }

  ExtensionParams par = given ? *given : compute_constants(input, cfg);
  res.params = par;

  // the input may already be positive everywhere: trivial extension
  {
    double min_inside = std::numeric_limits<double>::infinity();
    for (double t : coarse_times)
      for (const Point& p : ball_points(par.k1, cfg.coarse_grid_n))
        min_inside = std::min(min_inside, detail::family_hamiltonian(input, t, p));
    res.input_min_h_inside = min_inside;
    if (min_inside > 0.0) {
      res.trivial = true;
      PathBuilder b(Box::cube(par.k2), "trivial-extension[" + input.family.label + "]");
      b.add_stationary();
      res.path = b.finish();
      res.path.left_family = input.family;
      const GridSpec vgrid{Box::cube(par.k2), cfg.verify_grid_n};
      res.classification = classify(res.path, vgrid, cfg.classify_tol, cfg.verify_time_samples);
      return res;
    }
  }

  double height = par.bump_height;
  double k2 = par.k2, k3 = par.k3;
  for (int radius_try = 0; radius_try <= cfg.radius_doubling_cap; ++radius_try) {
    bool enlarge_radii = false;
    for (int height_try = 0; height_try <= cfg.height_doubling_cap; ++height_try) {
      const ScalarField h = bump_field(k2, k3, height);
      const GridSpec fbox{Box::cube(k3), cfg.factorize_grid_n};
      NullPathResult psi =
          subdivide_and_connect(hamiltonian_family(h, -1.0, cfg.family_step), std::nullopt,
                                std::nullopt, fbox);

      // containment: phi_t(psi_t(K1)) must stay inside K2
      double max_radius = 0.0;
      const std::vector<Point> k1_sphere = sphere_points(par.k1, 5);
      for (double t : coarse_times) {
        const DiffeoSpec psit = path_slice(psi.path, t);
        const DiffeoSpec phit = DiffeoSpec::hamiltonian_slice(h, t, cfg.family_step);
        for (const Point& p : k1_sphere) max_radius = std::max(max_radius, phit(psit(p)).norm());
      }
      if (max_radius > k2) {
        enlarge_radii = true;
        res.containment_max_radius = max_radius;
        break;
      }

      DiffeoPath out;
      out.segments = psi.path.segments;
      out.right_factor = psi.path.right_factor;
      out.box = Box::cube(k2);
      out.label = "extension[" + input.family.label + "]";
      const DiffeoFamily f = input.family;
      const double step = cfg.family_step;
      out.left_family = DiffeoFamily{
          [f, h, step](double t) {
            return DiffeoSpec::compose({f.at(t), DiffeoSpec::hamiltonian_slice(h, t, step)});
          },
          "(" + f.label + " . phi[h])", {}};

      const GridSpec vgrid{Box::cube(k2), cfg.verify_grid_n};
      ClassifyResult cls = classify_extension_structural(input, h, psi.path, cfg.family_step,
                                                         vgrid, cfg.verify_time_samples,
                                                         cfg.classify_tol);
      if (cls.verdict != Verdict::Positive) {
        res.classification = cls;
        height *= 2.0;
        continue;
      }

      const double k3_eff = std::max(k3, psi.conj_support);
      const ShellSpec far_shell{k3_eff + 1.0, k3_eff + 3.0, 7};
      double far_sup = 0.0;
      for (double t : coarse_times) {
        const DiffeoSpec out_t = path_slice(out, t);
        const DiffeoSpec f_t = f.at(t);
        for (const Point& p : far_shell.points())
          far_sup = std::max(far_sup, (out_t(p) - f_t(p)).norm());
      }

      const GridSpec egrid{Box::cube(par.k1), cfg.coarse_grid_n};
      res.path = out;
      res.params.k2 = k2;
      res.params.k3 = k3;
      res.params.k3_effective = k3_eff;
      res.params.bump_height = height;
      res.classification = cls;
      res.far_field_sup = far_sup;
      res.containment_max_radius = max_radius;
      res.endpoint_error_id = map_distance(path_slice(out, 0.0), DiffeoSpec::identity(), egrid);
      res.endpoint_error_f1 = map_distance(path_slice(out, 1.0), f.at(1.0), egrid);
      res.subdivisions = psi.subdivisions;
      res.eps = psi.eps;
      if (far_sup > cfg.far_field_tol)
        throw ContainmentFailure("far-field agreement " + detail::format_number(far_sup) +
                                 " exceeds tolerance beyond K3");
      return res;
    }
    if (!enlarge_radii)
      throw PositivityShortfall("bump height cap reached with min alpha " +
                                    detail::format_number(res.classification.min_alpha),
                                res.classification.min_alpha);
    k2 *= 2.0;
    k3 *= 2.0;
  }
  throw ContainmentFailure("radius ladder cap reached without containment");
}

}  // namespace csteer
