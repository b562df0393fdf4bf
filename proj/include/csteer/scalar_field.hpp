#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "csteer/expr.hpp"
#include "csteer/geometry.hpp"
#include "csteer/ramp.hpp"

namespace csteer {

/// A scalar function of a point with optional exact gradient and Hessian.
/// Gradients of parsed fields come from symbolic differentiation, never finite
/// differences; closed-form fields carry hand-coded derivatives.
struct ScalarField {
  std::function<double(const Point&)> value;
  std::function<Vec3(const Point&)> grad;
  std::function<Mat3(const Point&)> hess;
  // fused value+gradient evaluator; one call per integrator stage
  std::function<void(const Point&, double&, Vec3&)> value_and_grad;
  std::string label;

  bool has_grad() const { return static_cast<bool>(grad); }
  bool has_hess() const { return static_cast<bool>(hess); }

  Vec3 gradient(const Point& p) const {
    if (!grad) throw Error("scalar field '" + label + "' has no gradient");
    return grad(p);
  }

  Mat3 hessian(const Point& p) const {
    if (!hess) throw Error("scalar field '" + label + "' has no Hessian");
    return hess(p);
  }

  void eval_value_and_grad(const Point& p, double& v, Vec3& g) const {
    if (value_and_grad) {
      value_and_grad(p, v, g);
      return;
    }
    v = value(p);
    g = gradient(p);
  }
};

inline ScalarField constant_field(double c) {
  ScalarField f;
  f.value = [c](const Point&) { return c; };
  f.grad = [](const Point&) { return Vec3{}; };
  f.hess = [](const Point&) { return Mat3::zero(); };
  f.value_and_grad = [c](const Point&, double& v, Vec3& g) {
    v = c;
    g = Vec3{};
  };
  f.label = "const " + detail::format_number(c);
  return f;
}

/// Field backed by an expression tree; all derivatives symbolic.
inline ScalarField field_from_expr(const Expr& e, std::string label = {}) {
  ScalarField f;
  f.label = label.empty() ? expr_to_string(e) : std::move(label);
  f.value = [e](const Point& p) { return expr_eval(e, p); };
  const Expr dx = expr_diff(e, 0), dy = expr_diff(e, 1), dz = expr_diff(e, 2);
  f.grad = [dx, dy, dz](const Point& p) {
    return Vec3{expr_eval(dx, p), expr_eval(dy, p), expr_eval(dz, p)};
  };
  f.value_and_grad = [e, dx, dy, dz](const Point& p, double& v, Vec3& g) {
    v = expr_eval(e, p);
    g = {expr_eval(dx, p), expr_eval(dy, p), expr_eval(dz, p)};
  };
  const Expr dxx = expr_diff(dx, 0), dxy = expr_diff(dx, 1), dxz = expr_diff(dx, 2);
  const Expr dyy = expr_diff(dy, 1), dyz = expr_diff(dy, 2), dzz = expr_diff(dz, 2);
  f.hess = [dxx, dxy, dxz, dyy, dyz, dzz](const Point& p) {
    Mat3 h;
    const double xy = expr_eval(dxy, p), xz = expr_eval(dxz, p), yz = expr_eval(dyz, p);
    h.row[0] = {expr_eval(dxx, p), xy, xz};
    h.row[1] = {xy, expr_eval(dyy, p), yz};
    h.row[2] = {xz, yz, expr_eval(dzz, p)};
    return h;
  };
  return f;
}

inline ScalarField field_from_source(std::string_view src) {
  return field_from_expr(parse_expression(src), std::string(src));
}

/// Radially symmetric plateau field: height * ramp((r_outer - |p|)/(r_outer -
/// r_inner)). Equals `height` for |p| <= r_inner and 0 for |p| >= r_outer,
/// C-infinity in between. Exact hand-coded gradient and Hessian.
inline ScalarField bump_field(double r_inner, double r_outer, double height) {
  if (!(r_inner < r_outer)) throw ConfigError("bump_field requires r_inner < r_outer");
  if (height < 0.0) throw ConfigError("bump_field requires height >= 0");
  ScalarField f;
  f.label = "bump(" + detail::format_number(r_inner) + "," + detail::format_number(r_outer) +
            ")*" + detail::format_number(height);
  const double w = r_outer - r_inner;
  // radial profile H(r) and its derivatives
  auto H = [=](double r) { return height * flat_ramp((r_outer - r) / w); };
  auto H1 = [=](double r) { return -height * flat_ramp_d1((r_outer - r) / w) / w; };
  auto H2 = [=](double r) { return height * flat_ramp_d2((r_outer - r) / w) / (w * w); };
  f.value = [H](const Point& p) { return H(p.norm()); };
  f.grad = [=](const Point& p) {
    const double r = p.norm();
    if (r <= r_inner || r >= r_outer) return Vec3{};
    return p * (H1(r) / r);
  };
  f.value_and_grad = [=](const Point& p, double& v, Vec3& g) {
    const double r = p.norm();
    v = H(r);
    g = (r <= r_inner || r >= r_outer) ? Vec3{} : p * (H1(r) / r);
  };
  f.hess = [=](const Point& p) {
    const double r = p.norm();
    if (r <= r_inner || r >= r_outer) return Mat3::zero();
    const double h1r = H1(r) / r;
    const double c = (H2(r) - h1r) / (r * r);
    Mat3 m = Mat3::outer(p, p) * c;
    m.row[0].x += h1r;
    m.row[1].y += h1r;
    m.row[2].z += h1r;
    return m;
  };
  return f;
}

/// Scalar function of one variable with exact first and second derivatives;
/// the carrier of jet generators u(y).
struct ScalarField1D {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::string label;
};

inline ScalarField1D field1d_from_expr(const Expr& e, std::string label = {}) {
  ScalarField1D f;
  f.label = label.empty() ? expr_to_string(e) : std::move(label);
  const Expr d1 = expr_diff(e, 1), d2 = expr_diff(d1, 1);
  f.value = [e](double y) { return expr_eval(e, Point{0, y, 0}); };
  f.d1 = [d1](double y) { return expr_eval(d1, Point{0, y, 0}); };
  f.d2 = [d2](double y) { return expr_eval(d2, Point{0, y, 0}); };
  return f;
}

/// Parse a one-variable function of y, e.g. "y^2 / 2".
inline ScalarField1D parse_field1d(std::string_view src) {
  return field1d_from_expr(parse_expression(src, "y"), std::string(src));
}

}  // namespace csteer
