#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>

#include "csteer/contact.hpp"
#include "csteer/diffeo.hpp"
#include "csteer/geometry.hpp"
#include "csteer/grid.hpp"
#include "csteer/integrate.hpp"

namespace csteer {

/// The amplitudes tau_i of the pointwise decomposition
///   f(p) = phi^X_{tau1} ( phi^Y_{tau2} ( phi^Z_{tau3} (p) ) ):
///     tau1 = f_x - x
///     tau3 = (f_z - z + x (f_y - y)) / eps
///     tau2 = (f_y - y) - tau3.
inline Vec3 compute_tau(const DiffeoSpec& f, double eps, const Point& p) {
  const Vec3 d = f.displacement(p);
  const double t3 = (d.z + p.x * d.y) / eps;
  return {d.x, d.y - t3, t3};
}

namespace detail {

inline Vec3 grad_tau1(const Mat3& Jf) { return Jf.row[0] - Vec3{1, 0, 0}; }

inline Vec3 grad_tau3(const DiffeoSpec& f, double eps, const Point& p, const Mat3& Jf) {
  const Vec3 gy = Jf.row[1] - Vec3{0, 1, 0};
  Vec3 g = Jf.row[2] - Vec3{0, 0, 1} + gy * p.x;
  g.x += f.displacement(p).y;
  return g * (1.0 / eps);
}

struct PointKey {
  std::uint64_t x, y, z;
  bool operator==(const PointKey&) const = default;
};

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const {
    std::uint64_t h = k.x * 0x9e3779b97f4a7c15ull;
    h ^= k.y + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= k.z + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Memo for Newton inverses, keyed by the query point's bit pattern.
/// Internally synchronized; results are deterministic regardless of cache
/// state, so concurrent grid sweeps stay reproducible.
struct InverseCache {
  std::unordered_map<PointKey, Point, PointKeyHash> map;
  std::mutex mu;
  static constexpr std::size_t kCap = 1u << 20;

  template <typename Fn>
  Point get_or_compute(const Point& q, Fn&& fn) {
    const PointKey key{std::bit_cast<std::uint64_t>(q.x), std::bit_cast<std::uint64_t>(q.y),
                       std::bit_cast<std::uint64_t>(q.z)};
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = map.find(key);
      if (it != map.end()) return it->second;
    }
    const Point v = fn();
    {
      std::lock_guard<std::mutex> lock(mu);
      if (map.size() >= kCap) map.clear();
      map.emplace(key, v);
    }
    return v;
  }
};

}  // namespace detail

/// The +-eps conjugating factor of the factorization, realized as the
/// time-(+-eps) flow of chi * X with chi a radial flat cutoff. On the plateau
/// the flow is bitwise the pure translation phi^X, so every on-box identity is
/// unchanged; beyond the support the factor is the identity, which is what
/// makes null paths of compactly supported maps compactly supported.
struct Conjugator {
  double eps = 0.5;
  double plateau = 4.0;
  double support = 8.0;
  double step = 1.0 / 32;

  VectorField field() const { return cutoff_x_field(plateau, support); }

  DiffeoSpec map(double time) const {
    return DiffeoSpec::field_flow_slice(field(), time, step);
  }
};

/// tau fields of f at fixed eps, with exact gradients from f's Jacobian.
struct TauTriple {
  ScalarField tau1, tau2, tau3;
};

inline TauTriple tau_fields(const DiffeoSpec& f, double eps) {
  TauTriple t;
  t.tau1.label = "tau1[" + f.describe() + "]";
  t.tau1.value = [f, eps](const Point& p) { return compute_tau(f, eps, p).x; };
  t.tau1.grad = [f](const Point& p) { return detail::grad_tau1(f.jacobian(p)); };
  t.tau2.label = "tau2[" + f.describe() + "]";
  t.tau2.value = [f, eps](const Point& p) { return compute_tau(f, eps, p).y; };
  t.tau2.grad = [f, eps](const Point& p) {
    const Mat3 J = f.jacobian(p);
    return J.row[1] - Vec3{0, 1, 0} - detail::grad_tau3(f, eps, p, J);
  };
  t.tau3.label = "tau3[" + f.describe() + "]";
  t.tau3.value = [f, eps](const Point& p) { return compute_tau(f, eps, p).z; };
  t.tau3.grad = [f, eps](const Point& p) {
    return detail::grad_tau3(f, eps, p, f.jacobian(p));
  };
  return t;
}

/// The partial compositions of the factorization:
///   Phi1(p) = phi^Z_{tau3(p)}(p) = (x, y + tau3, z + (eps - x) tau3)
///   Phi2(p) = phi^Y_{tau2(p)}(Phi1(p)) = (x, f_y, f_z),
/// both with exact Jacobians by the chain rule.
struct PhiMaps {
  DiffeoSpec phi1, phi2;
};

inline PhiMaps build_phi(const DiffeoSpec& f, double eps) {
  PhiMaps out;
  out.phi1 = DiffeoSpec::custom(
      [f, eps](const Point& p) {
        const double t3 = compute_tau(f, eps, p).z;
        return Point{p.x, p.y + t3, p.z + (eps - p.x) * t3};
      },
      [f, eps](const Point& p) {
        const double t3 = compute_tau(f, eps, p).z;
        const Vec3 g3 = detail::grad_tau3(f, eps, p, f.jacobian(p));
        Mat3 j;
        j.row[0] = {1, 0, 0};
        j.row[1] = Vec3{0, 1, 0} + g3;
        j.row[2] = Vec3{0, 0, 1} + g3 * (eps - p.x) + Vec3{-t3, 0, 0};
        return j;
      },
      "Phi1[" + f.describe() + "]", f.domain());
  out.phi2 = DiffeoSpec::custom(
      [f](const Point& p) {
        const Point q = f(p);
        return Point{p.x, q.y, q.z};
      },
      [f](const Point& p) {
        const Mat3 J = f.jacobian(p);
        Mat3 j;
        j.row[0] = {1, 0, 0};
        j.row[1] = J.row[1];
        j.row[2] = J.row[2];
        return j;
      },
      "Phi2[" + f.describe() + "]", f.domain());
  return out;
}

/// The data realizing the five-factor horizontal factorization
///   f = phi^X_{a1} . phi^Y_{a2} . c_eps . phi^Y_{a3} . c_eps^{-1}
/// with a1 = tau1 o Phi2^{-1}, a2 = tau2 o Phi1^{-1}, a3 = tau3 o c_eps and
/// c_eps the (localized) +eps conjugator. Inverse compositions are realized
/// through Newton inversion on demand, with a synchronized memo.
struct Factorization {
  double eps = 0.5;
  DiffeoSpec source;
  GridSpec box;
  Conjugator conj;
  PhiMaps phi;
  TauTriple taus;  // the same amplitudes in source coordinates (no inversion)
  ScalarField a1, a2, a3;
  double residual_sup = 0.0;   // sup |factorization_eval - f| over the box grid
  double amplitude_bound = 0.0;
};

inline Point factorization_eval(const Factorization& F, const Point& p) {
  const Point q0 = rk4_flow(F.conj.field(), -F.eps, p, F.conj.step);
  const Point q1 = flow_closed_form(FrameFieldId::Y(), F.a3.value(q0), q0);
  const Point q2 = rk4_flow(F.conj.field(), F.eps, q1, F.conj.step);
  const Point q3 = flow_closed_form(FrameFieldId::Y(), F.a2.value(q2), q2);
  return flow_closed_form(FrameFieldId::X(), F.a1.value(q3), q3);
}

struct FactorizeParams {
  double residual_tol = 1e-6;
  double newton_tol = 1e-12;
  double jac_gate = 0.5;  // Jacobian-deviation half of the near-identity gate
};

/// Near-identity gate + construction + a-posteriori certification. The gate
/// (displacement <= eps, Jacobian deviation <= 1/2) decides when callers
/// should subdivide; the real contract is the certified round-trip residual
/// on the box grid. Throws NotInNeighborhood or InversionFailed.
inline Factorization factorize(const DiffeoSpec& f, double eps, const GridSpec& box,
                               const FactorizeParams& params = {}) {
  if (!(eps > 0.0)) throw ConfigError("factorize requires eps > 0");
  NearIdentityReport gate = check_near_identity(f, box, 0.0);
  if (gate.max_displacement > eps || gate.max_jacobian_deviation > params.jac_gate)
    throw NotInNeighborhood("near-identity gate failed for " + f.describe() + ": displacement " +
                                detail::format_number(gate.max_displacement) + " vs eps " +
                                detail::format_number(eps) + ", Jacobian deviation " +
                                detail::format_number(gate.max_jacobian_deviation),
                            gate.max_displacement, gate.max_jacobian_deviation);

  Factorization F;
  F.eps = eps;
  F.source = f;
  F.box = box;

  // amplitude bound over the box (tau is queried on box points and their
  // x-translates, which the plateau margin absorbs)
  double amp = 0.0;
  for (const Point& p : box.points()) {
    const Vec3 t = compute_tau(f, eps, p);
    amp = std::max({amp, std::fabs(t.x), std::fabs(t.y), std::fabs(t.z)});
  }
  F.amplitude_bound = amp;

  const double reach = box.box.max_abs_coord() + eps + amp * (2.0 + box.box.max_abs_x() + eps);
  F.conj.eps = eps;
  F.conj.plateau = reach + 1.0;
  F.conj.support = 2.0 * F.conj.plateau;
  F.conj.step = eps / 16.0;

  F.phi = build_phi(f, eps);
  F.taus = tau_fields(f, eps);
  const TauTriple& tau = F.taus;

  auto cache1 = std::make_shared<detail::InverseCache>();
  auto cache2 = std::make_shared<detail::InverseCache>();
  const double ntol = params.newton_tol;

  const DiffeoSpec phi1 = F.phi.phi1, phi2 = F.phi.phi2;
  F.a1.label = "a1 = tau1 o Phi2^-1";
  F.a1.value = [tau, phi2, cache2, ntol](const Point& p) {
    const Point q = cache2->get_or_compute(p, [&] { return invert_point(phi2, p, p, ntol); });
    return tau.tau1.value(q);
  };
  F.a1.grad = [tau, phi2, cache2, ntol](const Point& p) {
    const Point q = cache2->get_or_compute(p, [&] { return invert_point(phi2, p, p, ntol); });
    return inverse3(phi2.jacobian(q)).transpose() * tau.tau1.gradient(q);
  };
  F.a2.label = "a2 = tau2 o Phi1^-1";
  F.a2.value = [tau, phi1, cache1, ntol](const Point& p) {
    const Point q = cache1->get_or_compute(p, [&] { return invert_point(phi1, p, p, ntol); });
    return tau.tau2.value(q);
  };
  F.a2.grad = [tau, phi1, cache1, ntol](const Point& p) {
    const Point q = cache1->get_or_compute(p, [&] { return invert_point(phi1, p, p, ntol); });
    return inverse3(phi1.jacobian(q)).transpose() * tau.tau2.gradient(q);
  };
  const Conjugator conj = F.conj;
  F.a3.label = "a3 = tau3 o c_eps";
  F.a3.value = [tau, conj](const Point& p) {
    return tau.tau3.value(rk4_flow(conj.field(), conj.eps, p, conj.step));
  };
  F.a3.grad = [tau, conj](const Point& p) {
    const auto [q, J] = rk4_flow_with_jacobian(conj.field(), conj.eps, p, conj.step);
    return J.transpose() * tau.tau3.gradient(q);
  };

  // a-posteriori certification: Newton must succeed at every box sample and
  // the round trip must reproduce f
  double sup = 0.0;
  for (const Point& p : box.points()) {
    const double r = (factorization_eval(F, p) - f(p)).norm();
    sup = std::max(sup, r);
  }
  F.residual_sup = sup;
  if (sup > params.residual_tol)
    throw NotInNeighborhood("factorization residual " + detail::format_number(sup) +
                                " exceeds tolerance " + detail::format_number(params.residual_tol) +
                                " for " + f.describe(),
                            gate.max_displacement, gate.max_jacobian_deviation);
  return F;
}

/// Largest eps from the ladder {1, 1/2, 1/4, ..., 2^-20} at which factorize
/// succeeds. Deterministic; ties resolve toward larger eps by construction.
/// The displacement half of the gate is eps-independent, so rungs the gate
/// cannot pass are skipped without re-sweeping.
inline double auto_epsilon(const DiffeoSpec& f, const GridSpec& box,
                           const FactorizeParams& params = {}) {
  const NearIdentityReport gate = check_near_identity(f, box, 0.0);
  double eps = 1.0;
  for (int k = 0; k <= 20; ++k, eps *= 0.5) {
    if (gate.max_displacement > eps || gate.max_jacobian_deviation > params.jac_gate) break;
    try {
      factorize(f, eps, box, params);
      return eps;
    } catch (const NotInNeighborhood&) {
    } catch (const InversionFailed&) {
    }
  }
  throw NoFeasibleEpsilon("no ladder eps admits a factorization of " + f.describe());
}

}  // namespace csteer
