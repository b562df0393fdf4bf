#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csteer/contact.hpp"
#include "csteer/expr.hpp"
#include "csteer/geometry.hpp"
#include "csteer/grid.hpp"
#include "csteer/integrate.hpp"
#include "csteer/scalar_field.hpp"

namespace csteer {

class DiffeoSpec;

namespace detail {

/// Implementation node of a smooth map R^3 -> R^3 with exact Jacobian.
/// Immutable after construction; DiffeoSpec values share nodes freely.
struct MapImpl {
  virtual ~MapImpl() = default;
  virtual Point eval(const Point& p) const = 0;
  virtual Mat3 jacobian(const Point& p) const = 0;
  virtual std::string describe() const = 0;
  virtual std::optional<DiffeoSpec> known_inverse() const;
  virtual bool is_identity() const { return false; }
  /// f(p) - p; closed-form families override to avoid the cancellation of the
  /// generic difference, which keeps the tau amplitudes exact.
  virtual Vec3 displacement(const Point& p) const { return eval(p) - p; }
};

}  // namespace detail

/// A smooth map R^3 -> R^3 with exact Jacobian: identity, builtin parametric
/// families, expression-parsed maps, compositions and flow time-slices.
/// Values are immutable and cheap to copy; all operations are reentrant.
class DiffeoSpec {
 public:
  DiffeoSpec();  // identity

  explicit DiffeoSpec(std::shared_ptr<const detail::MapImpl> impl, Box domain = Box::cube(1e18))
      : impl_(std::move(impl)), domain_(domain) {}

  Point operator()(const Point& p) const {
    if (!domain_.contains(p))
      throw DomainError("evaluation outside the certified domain box of " + describe());
    return impl_->eval(p);
  }

  Mat3 jacobian(const Point& p) const {
    if (!domain_.contains(p))
      throw DomainError("Jacobian outside the certified domain box of " + describe());
    return impl_->jacobian(p);
  }

  Vec3 displacement(const Point& p) const {
    if (!domain_.contains(p))
      throw DomainError("displacement outside the certified domain box of " + describe());
    return impl_->displacement(p);
  }

  const Box& domain() const { return domain_; }
  DiffeoSpec with_domain(const Box& b) const {
    DiffeoSpec c = *this;
    c.domain_ = b;
    return c;
  }

  std::string describe() const { return impl_->describe(); }
  bool is_identity() const { return impl_->is_identity(); }

  /// Closed-form inverse when the representation knows one (translations,
  /// scalings, flow slices by time reversal, compositions thereof).
  std::optional<DiffeoSpec> known_inverse() const { return impl_->known_inverse(); }

  /// The inverse as a map: closed form when known, otherwise a Newton-backed
  /// wrapper evaluating invert_point on demand.
  DiffeoSpec inverse() const;

  // --- constructors for the builtin families ---
  static DiffeoSpec identity();
  static DiffeoSpec translation(const Vec3& v);
  static DiffeoSpec reeb_time(double t) { return frame_flow(FrameFieldId::Reeb(), t); }
  static DiffeoSpec frame_flow(const FrameFieldId& id, double t);
  static DiffeoSpec scale(double lambda);
  static DiffeoSpec parsed(std::string_view source, Box domain = Box::cube(10.0));
  static DiffeoSpec from_exprs(std::array<Expr, 3> components, std::string label,
                               Box domain = Box::cube(10.0));
  static DiffeoSpec compose(std::vector<DiffeoSpec> fs);  // fs[0] applied last
  static DiffeoSpec hamiltonian_slice(const ScalarField& h, double t, double step = 1.0 / 64,
                                      bool smooth_time_grid = true);
  static DiffeoSpec field_flow_slice(const VectorField& f, double t, double step = 1.0 / 32,
                                     bool smooth_time_grid = false);
  static DiffeoSpec bump_shear(double c, double r_inner = 1.0, double r_outer = 2.0);
  static DiffeoSpec custom(std::function<Point(const Point&)> eval,
                           std::function<Mat3(const Point&)> jac, std::string label,
                           Box domain = Box::cube(1e18));

 private:
  std::shared_ptr<const detail::MapImpl> impl_;
  Box domain_;
};

/// Damped-Newton point inversion: returns p with |f(p) - q| <= tol.
/// Step halving up to `max_halvings`, iteration cap `max_iters`. Throws
/// SingularJacobian / NoConvergence, both signalling the map is outside the
/// invertibility neighbourhood.
inline Point invert_point(const DiffeoSpec& f, const Point& q, Point guess, double tol = 1e-12,
                          int max_iters = 50, int max_halvings = 20) {
  require_finite(q, "invert_point target");
  Point p = guess;
  Vec3 r = f(p) - q;
  double rn = r.norm();
  for (int it = 0; it < max_iters; ++it) {
    if (rn <= tol) return p;
    const Mat3 J = f.jacobian(p);
    const Vec3 s = solve3(J, r);
    double lambda = 1.0;
    for (int h = 0; h <= max_halvings; ++h) {
      const Point cand = p - s * lambda;
      const Vec3 rc = f(cand) - q;
      const double rcn = rc.norm();
      if (rcn < rn || rcn <= tol) {
        p = cand;
        r = rc;
        rn = rcn;
        break;
      }
      if (h == max_halvings)
        throw NoConvergence("Newton stalled inverting " + f.describe() + " (residual " +
                            detail::format_number(rn) + ")");
      lambda *= 0.5;
    }
  }
  if (rn <= tol) return p;
  throw NoConvergence("Newton hit the iteration cap inverting " + f.describe() + " (residual " +
                      detail::format_number(rn) + ")");
}

/// Grid certificate that f is delta-close to the identity in C^1: true iff
/// max |f(p) - p| <= delta and max ||Df(p) - Id||_inf <= delta over the grid.
struct NearIdentityReport {
  bool ok = false;
  double max_displacement = 0.0;
  double max_jacobian_deviation = 0.0;
  Point worst_point{};
};

inline NearIdentityReport check_near_identity(const DiffeoSpec& f, const GridSpec& grid,
                                              double delta) {
  NearIdentityReport rep;
  const Mat3 id = Mat3::identity();
  for (const Point& p : grid.points()) {
    const double disp = (f(p) - p).norm();
    const double jdev = (f.jacobian(p) - id).inf_norm();
    if (disp > rep.max_displacement) {
      rep.max_displacement = disp;
      rep.worst_point = p;
    }
    rep.max_jacobian_deviation = std::max(rep.max_jacobian_deviation, jdev);
  }
  rep.ok = rep.max_displacement <= delta && rep.max_jacobian_deviation <= delta;
  return rep;
}

/// (f^* alpha)(R) at p: alpha evaluated at f(p) on the Jacobian image of the
/// Reeb vector. Equals the conformal factor rho when f is a contactomorphism.
inline double conformal_factor(const DiffeoSpec& f, const Point& p) {
  const Vec3 v = f.jacobian(p) * Vec3{0, 0, 1};
  return alpha_eval(f(p), v);
}

/// Sup over the grid of |a(p) - b(p)|.
inline double map_distance(const DiffeoSpec& a, const DiffeoSpec& b, const GridSpec& grid) {
  double sup = 0.0;
  for (const Point& p : grid.points()) sup = std::max(sup, (a(p) - b(p)).norm());
  return sup;
}

/// Sup over the grid of |alpha(Df v)| for v in {X(p), Y(p)}: zero exactly when
/// f preserves the contact hyperplanes at the sampled points.
inline double kernel_deviation(const DiffeoSpec& f, const GridSpec& grid) {
  double worst = 0.0;
  for (const Point& p : grid.points()) {
    const Mat3 J = f.jacobian(p);
    const Point q = f(p);
    worst = std::max(worst, std::fabs(alpha_eval(q, J * frame_eval(FrameFieldId::X(), p).vec)));
    worst = std::max(worst, std::fabs(alpha_eval(q, J * frame_eval(FrameFieldId::Y(), p).vec)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// implementation nodes

namespace detail {

struct IdentityImpl final : MapImpl {
  Point eval(const Point& p) const override { return p; }
  Vec3 displacement(const Point&) const override { return {}; }
  Mat3 jacobian(const Point&) const override { return Mat3::identity(); }
  std::string describe() const override { return "id"; }
  std::optional<DiffeoSpec> known_inverse() const override { return DiffeoSpec::identity(); }
  bool is_identity() const override { return true; }
};

struct TranslationImpl final : MapImpl {
  Vec3 v;
  explicit TranslationImpl(const Vec3& v_) : v(v_) {}
  Point eval(const Point& p) const override { return p + v; }
  Vec3 displacement(const Point&) const override { return v; }
  Mat3 jacobian(const Point&) const override { return Mat3::identity(); }
  std::string describe() const override {
    return "translate(" + format_number(v.x) + "," + format_number(v.y) + "," + format_number(v.z) +
           ")";
  }
  std::optional<DiffeoSpec> known_inverse() const override { return DiffeoSpec::translation(-v); }
};

struct FrameFlowImpl final : MapImpl {
  FrameFieldId id;
  double t;
  FrameFlowImpl(const FrameFieldId& id_, double t_) : id(id_), t(t_) {}
  Point eval(const Point& p) const override { return flow_closed_form(id, t, p); }
  Vec3 displacement(const Point& p) const override {
    switch (id.tag) {
      case FrameTag::X: return {t, 0, 0};
      case FrameTag::Y: return {0, t, -p.x * t};
      case FrameTag::Z: return {0, t, (id.eps - p.x) * t};
      case FrameTag::Reeb: return {0, 0, t};
    }
    return {};
  }
  Mat3 jacobian(const Point& p) const override { return flow_closed_form_jacobian(id, t, p); }
  std::string describe() const override { return "flow[" + id.name() + "," + format_number(t) + "]"; }
  std::optional<DiffeoSpec> known_inverse() const override {
    return DiffeoSpec::frame_flow(id, -t);
  }
};

struct ScaleImpl final : MapImpl {
  double lambda;
  explicit ScaleImpl(double l) : lambda(l) {}
  Point eval(const Point& p) const override {
    return {lambda * p.x, lambda * p.y, lambda * lambda * p.z};
  }
  Mat3 jacobian(const Point&) const override {
    Mat3 j = Mat3::zero();
    j.row[0].x = lambda;
    j.row[1].y = lambda;
    j.row[2].z = lambda * lambda;
    return j;
  }
  std::string describe() const override { return "scale(" + format_number(lambda) + ")"; }
  std::optional<DiffeoSpec> known_inverse() const override {
    return DiffeoSpec::scale(1.0 / lambda);
  }
};

struct ParsedImpl final : MapImpl {
  std::array<Expr, 3> comp;
  std::array<std::array<Expr, 3>, 3> jac;  // jac[row][col]
  std::string source;
  ParsedImpl(std::array<Expr, 3> c, std::string src) : comp(std::move(c)), source(std::move(src)) {
    for (int r = 0; r < 3; ++r)
      for (int v = 0; v < 3; ++v) jac[r][v] = expr_diff(comp[r], v);
  }
  Point eval(const Point& p) const override {
    return {expr_eval(comp[0], p), expr_eval(comp[1], p), expr_eval(comp[2], p)};
  }
  Mat3 jacobian(const Point& p) const override {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
      m.row[r] = {expr_eval(jac[r][0], p), expr_eval(jac[r][1], p), expr_eval(jac[r][2], p)};
    return m;
  }
  std::string describe() const override { return source; }
};

struct CompositionImpl final : MapImpl {
  std::vector<DiffeoSpec> fs;  // fs[0] applied last
  explicit CompositionImpl(std::vector<DiffeoSpec> fs_) : fs(std::move(fs_)) {}
  Point eval(const Point& p) const override {
    Point q = p;
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) q = (*it)(q);
    return q;
  }
  Mat3 jacobian(const Point& p) const override {
    Point q = p;
    Mat3 J = Mat3::identity();
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
      J = it->jacobian(q) * J;
      q = (*it)(q);
    }
    return J;
  }
  std::string describe() const override {
    std::string s = "(";
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (i) s += " . ";
      s += fs[i].describe();
    }
    return s + ")";
  }
  std::optional<DiffeoSpec> known_inverse() const override {
    std::vector<DiffeoSpec> inv;
    inv.reserve(fs.size());
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
      auto ki = it->known_inverse();
      if (!ki) return std::nullopt;
      inv.push_back(*ki);
    }
    return DiffeoSpec::compose(std::move(inv));
  }
};

struct FieldFlowImpl final : MapImpl {
  VectorField field;
  double t;
  double step;
  bool smooth;  // step count independent of t, for slices finite-differenced in t
  FieldFlowImpl(VectorField f, double t_, double step_, bool smooth_)
      : field(std::move(f)), t(t_), step(step_), smooth(smooth_) {}
  int steps() const { return smooth ? rk4_step_count_smooth(t, step) : rk4_step_count(t, step); }
  Point eval(const Point& p) const override { return rk4_flow_n(field, t, p, steps()); }
  Mat3 jacobian(const Point& p) const override {
    return rk4_flow_with_jacobian_n(field, t, p, steps()).second;
  }
  std::string describe() const override {
    return "flow[" + field.label + "," + format_number(t) + "]";
  }
  std::optional<DiffeoSpec> known_inverse() const override {
    return DiffeoSpec(std::make_shared<FieldFlowImpl>(field, -t, step, smooth));
  }
};

struct BumpShearImpl final : MapImpl {
  ScalarField chi;
  double c;
  BumpShearImpl(double c_, double r1, double r2) : chi(bump_field(r1, r2, 1.0)), c(c_) {}
  Point eval(const Point& p) const override { return {p.x, p.y + c * chi.value(p), p.z}; }
  Vec3 displacement(const Point& p) const override { return {0, c * chi.value(p), 0}; }
  Mat3 jacobian(const Point& p) const override {
    Mat3 j = Mat3::identity();
    j.row[1] += chi.gradient(p) * c;
    return j;
  }
  std::string describe() const override { return "bumpshear(" + format_number(c) + ")"; }
};

struct CustomImpl final : MapImpl {
  std::function<Point(const Point&)> f;
  std::function<Mat3(const Point&)> j;
  std::string label;
  CustomImpl(std::function<Point(const Point&)> f_, std::function<Mat3(const Point&)> j_,
             std::string l)
      : f(std::move(f_)), j(std::move(j_)), label(std::move(l)) {}
  Point eval(const Point& p) const override { return f(p); }
  Mat3 jacobian(const Point& p) const override { return j(p); }
  std::string describe() const override { return label; }
};

struct NewtonInverseImpl final : MapImpl {
  DiffeoSpec inner;
  double tol;
  NewtonInverseImpl(DiffeoSpec in, double tol_) : inner(std::move(in)), tol(tol_) {}
  Point eval(const Point& q) const override { return invert_point(inner, q, q, tol); }
  Mat3 jacobian(const Point& q) const override { return inverse3(inner.jacobian(eval(q))); }
  std::string describe() const override { return "inverse[" + inner.describe() + "]"; }
  std::optional<DiffeoSpec> known_inverse() const override { return inner; }
};

inline std::optional<DiffeoSpec> MapImpl::known_inverse() const { return std::nullopt; }

}  // namespace detail

inline DiffeoSpec::DiffeoSpec()
    : impl_(std::make_shared<detail::IdentityImpl>()), domain_(Box::cube(1e18)) {}

inline DiffeoSpec DiffeoSpec::identity() { return DiffeoSpec(); }

inline DiffeoSpec DiffeoSpec::translation(const Vec3& v) {
  return DiffeoSpec(std::make_shared<detail::TranslationImpl>(v));
}

inline DiffeoSpec DiffeoSpec::frame_flow(const FrameFieldId& id, double t) {
  return DiffeoSpec(std::make_shared<detail::FrameFlowImpl>(id, t));
}

inline DiffeoSpec DiffeoSpec::scale(double lambda) {
  if (lambda == 0.0) throw ConfigError("scale(0) is not a diffeomorphism");
  return DiffeoSpec(std::make_shared<detail::ScaleImpl>(lambda));
}

inline DiffeoSpec DiffeoSpec::parsed(std::string_view source, Box domain) {
  return DiffeoSpec(std::make_shared<detail::ParsedImpl>(parse_map_source(source),
                                                         std::string(source)),
                    domain);
}

inline DiffeoSpec DiffeoSpec::from_exprs(std::array<Expr, 3> components, std::string label,
                                         Box domain) {
  return DiffeoSpec(std::make_shared<detail::ParsedImpl>(std::move(components), std::move(label)),
                    domain);
}

inline DiffeoSpec DiffeoSpec::compose(std::vector<DiffeoSpec> fs) {
  if (fs.empty()) return identity();
  if (fs.size() == 1) return fs.front();
  Box dom = fs.back().domain();
  return DiffeoSpec(std::make_shared<detail::CompositionImpl>(std::move(fs)), dom);
}

inline DiffeoSpec DiffeoSpec::hamiltonian_slice(const ScalarField& h, double t, double step,
                                                bool smooth_time_grid) {
  return DiffeoSpec(
      std::make_shared<detail::FieldFlowImpl>(hamiltonian_field(h), t, step, smooth_time_grid));
}

inline DiffeoSpec DiffeoSpec::field_flow_slice(const VectorField& f, double t, double step,
                                               bool smooth_time_grid) {
  return DiffeoSpec(std::make_shared<detail::FieldFlowImpl>(f, t, step, smooth_time_grid));
}

inline DiffeoSpec DiffeoSpec::bump_shear(double c, double r_inner, double r_outer) {
  return DiffeoSpec(std::make_shared<detail::BumpShearImpl>(c, r_inner, r_outer));
}

inline DiffeoSpec DiffeoSpec::custom(std::function<Point(const Point&)> eval,
                                     std::function<Mat3(const Point&)> jac, std::string label,
                                     Box domain) {
  return DiffeoSpec(
      std::make_shared<detail::CustomImpl>(std::move(eval), std::move(jac), std::move(label)),
      domain);
}

inline DiffeoSpec DiffeoSpec::inverse() const {
  if (auto ki = known_inverse()) return *ki;
  return DiffeoSpec(std::make_shared<detail::NewtonInverseImpl>(*this, 1e-12), domain_);
}

}  // namespace csteer
