#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <utility>

#include "csteer/contact.hpp"
#include "csteer/geometry.hpp"
#include "csteer/scalar_field.hpp"

namespace csteer {

/// A smooth vector field with its exact derivative, the input of the RK4 flow
/// maps. The derivative drives the variational equation, so flow Jacobians are
/// the exact derivatives of the discrete flow map (internal differentiation).
struct VectorField {
  std::function<Vec3(const Point&)> value;
  std::function<Mat3(const Point&)> jacobian;
  std::string label;
};

inline VectorField hamiltonian_field(const ScalarField& h) {
  VectorField f;
  f.label = "X_h[" + h.label + "]";
  f.value = [h](const Point& p) {
    double v;
    Vec3 g;
    h.eval_value_and_grad(p, v, g);
    return Vec3{p.x * g.z - g.y, g.x, v - p.x * g.x};
  };
  f.jacobian = [h](const Point& p) { return hamiltonian_vector_field_jacobian(h, p); };
  return f;
}

/// chi(p) * d/dx with chi a radial flat cutoff: 1 on |p| <= plateau, 0 on
/// |p| >= support. Horizontal (alpha(chi X) = 0), so its reparametrized flows
/// stay null; used to localize the +-eps conjugation factors.
inline VectorField cutoff_x_field(double plateau, double support) {
  const double width = support - plateau;
  VectorField f;
  f.label = "cutoffX(" + detail::format_number(plateau) + "," + detail::format_number(support) + ")";
  f.value = [plateau, support, width](const Point& p) {
    const double r = p.norm();
    if (r <= plateau) return Vec3{1.0, 0.0, 0.0};
    if (r >= support) return Vec3{0.0, 0.0, 0.0};
    return Vec3{flat_ramp((support - r) / width), 0.0, 0.0};
  };
  f.jacobian = [plateau, support, width](const Point& p) {
    Mat3 j = Mat3::zero();
    const double r = p.norm();
    if (r > plateau && r < support)
      j.row[0] = p * (-flat_ramp_d1((support - r) / width) / (width * r));
    return j;
  };
  return f;
}

/// Step count for a fixed map (no smoothness-in-t requirement).
inline int rk4_step_count(double t, double step) {
  const double at = std::fabs(t);
  if (at == 0.0) return 0;
  return std::max(1, static_cast<int>(std::ceil(at / step - 1e-12)));
}

/// Step count for time slices that get finite-differenced in t: independent
/// of t for |t| <= 1, so the map t -> flow is smooth (a jump in the step
/// count would put an O(h^5) kink under a 1e-5 difference quotient).
inline int rk4_step_count_smooth(double t, double step) {
  return std::max(1, static_cast<int>(std::ceil(std::max(std::fabs(t), 1.0) / step - 1e-12)));
}

/// Classical RK4 flow map of `field` over time t in exactly n equal steps.
inline Point rk4_flow_n(const VectorField& field, double t, Point p, int n) {
  if (n <= 0 || t == 0.0) return p;
  const double h = t / n;
  for (int i = 0; i < n; ++i) {
    const Vec3 k1 = field.value(p);
    const Vec3 k2 = field.value(p + k1 * (h / 2));
    const Vec3 k3 = field.value(p + k2 * (h / 2));
    const Vec3 k4 = field.value(p + k3 * h);
    p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
  }
  return p;
}

inline Point rk4_flow(const VectorField& field, double t, Point p, double step) {
  return rk4_flow_n(field, t, p, rk4_step_count(t, step));
}

/// RK4 flow with the variational equation integrated alongside. The returned
/// matrix is the exact Jacobian of the discrete flow map.
inline std::pair<Point, Mat3> rk4_flow_with_jacobian_n(const VectorField& field, double t, Point p,
                                                       int n) {
  Mat3 J = Mat3::identity();
  if (n <= 0 || t == 0.0) return {p, J};
  const double h = t / n;
  for (int i = 0; i < n; ++i) {
    const Vec3 k1 = field.value(p);
    const Mat3 K1 = field.jacobian(p) * J;
    const Point p2 = p + k1 * (h / 2);
    const Vec3 k2 = field.value(p2);
    const Mat3 K2 = field.jacobian(p2) * (J + K1 * (h / 2));
    const Point p3 = p + k2 * (h / 2);
    const Vec3 k3 = field.value(p3);
    const Mat3 K3 = field.jacobian(p3) * (J + K2 * (h / 2));
    const Point p4 = p + k3 * h;
    const Vec3 k4 = field.value(p4);
    const Mat3 K4 = field.jacobian(p4) * (J + K3 * h);
    p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    J = J + (K1 + K2 * 2.0 + K3 * 2.0 + K4) * (h / 6.0);
  }
  return {p, J};
}

inline std::pair<Point, Mat3> rk4_flow_with_jacobian(const VectorField& field, double t, Point p,
                                                     double step) {
  return rk4_flow_with_jacobian_n(field, t, p, rk4_step_count(t, step));
}

/// Flow of the contact Hamiltonian vector field X_h over time t, with a
/// step-halving order check: halving the step must change the result by no
/// more than `order_tol`, otherwise the step is too large for the field.
inline Point integrate_contact_flow(const ScalarField& h, double t, const Point& p, double step,
                                    double order_tol = 1e-7) {
  const VectorField f = hamiltonian_field(h);
  const Point coarse = rk4_flow(f, t, p, step);
  const Point fine = rk4_flow(f, t, p, step / 2.0);
  if ((coarse - fine).norm() > order_tol)
    throw StepTooLarge("contact flow step " + detail::format_number(step) +
                       " fails the halving check for h = " + h.label);
  return fine;
}

}  // namespace csteer
