#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csteer/diffeo.hpp"
#include "csteer/factorize.hpp"
#include "csteer/geometry.hpp"
#include "csteer/grid.hpp"
#include "csteer/paths.hpp"

namespace csteer {

inline DiffeoFamily reeb_family(double total_time) {
  DiffeoFamily fam;
  fam.at = [total_time](double t) { return DiffeoSpec::reeb_time(t * total_time); };
  fam.increment = [total_time](double ta, double tb) {
    return DiffeoSpec::reeb_time((tb - ta) * total_time);
  };
  fam.label = "reeb-family(" + detail::format_number(total_time) + ")";
  return fam;
}

/// Flow family of an autonomous contact Hamiltonian; increments are single
/// short flows, which keeps subdivision chains cheap and their junctions tight.
inline DiffeoFamily hamiltonian_family(const ScalarField& h, double total_time,
                                       double step = 1.0 / 64) {
  DiffeoFamily fam;
  fam.at = [h, total_time, step](double t) {
    return DiffeoSpec::hamiltonian_slice(h, t * total_time, step);
  };
  fam.increment = [h, total_time, step](double ta, double tb) {
    return DiffeoSpec::hamiltonian_slice(h, (tb - ta) * total_time, step, false);
  };
  fam.label = "ham-family[" + h.label + "](" + detail::format_number(total_time) + ")";
  return fam;
}

inline DiffeoFamily constant_family(const DiffeoSpec& f) {
  DiffeoFamily fam;
  fam.at = [f](double) { return f; };
  fam.increment = [](double, double) { return DiffeoSpec::identity(); };
  fam.label = "const-family[" + f.describe() + "]";
  return fam;
}

inline DiffeoSpec family_increment(const DiffeoFamily& fam, double ta, double tb) {
  if (fam.increment) return fam.increment(ta, tb);
  const DiffeoSpec fa = fam.at(ta);
  const DiffeoSpec fb = fam.at(tb);
  return fa.is_identity() ? fb : DiffeoSpec::compose({fb, fa.inverse()});
}

struct NullPathResult {
  DiffeoPath path;
  double eps = 0.0;
  int subdivisions = 1;
  double residual_sup = 0.0;   // worst factorization residual among increments
  double conj_support = 0.0;   // support radius of the localized conjugators
};

/// The five-segment null path realizing the factorization: the -eps
/// conjugator wind-up, phi^Y reparametrized by tau3, the +eps wind-down,
/// phi^Y by tau2 and phi^X by tau1. Amplitudes are evaluated at the path
/// source (the right-translated form of tau_i o Phi^{-1}), so slices compose
/// without point inversion; every velocity sample is horizontal and its alpha
/// vanishes exactly.
inline DiffeoPath factorization_null_path(const Factorization& F,
                                          WarpKind warp = WarpKind::FlatCinf) {
  const FlowSegmentField conj = make_flow_segment_field(F.conj.field(), F.conj.eps, F.conj.step);
  PathBuilder b(F.box.box, "null-path[" + F.source.describe() + "]");
  b.add_reparam(conj, constant_field(-F.eps), warp);
  b.add_reparam(FrameFieldId::Y(), F.taus.tau3, warp);
  b.add_reparam(conj, constant_field(F.eps), warp);
  b.add_reparam(FrameFieldId::Y(), F.taus.tau2, warp);
  b.add_reparam(FrameFieldId::X(), F.taus.tau1, warp);
  return b.finish();
}

/// Null path from id to f. eps = nullopt runs the auto ladder.
inline NullPathResult null_path_to(const DiffeoSpec& f, std::optional<double> eps,
                                   const GridSpec& box, const FactorizeParams& params = {}) {
  const double e = eps ? *eps : auto_epsilon(f, box, params);
  Factorization F = factorize(f, e, box, params);
  NullPathResult r;
  r.eps = e;
  r.residual_sup = F.residual_sup;
  r.conj_support = F.conj.support;
  r.path = factorization_null_path(F);
  return r;
}

/// The explicit null path to the Reeb time-T map. The taus are the constants
/// (0, -T/eps, T/eps), so the amplitude segments are plain phi^Y flows with
/// amplitude O(T/eps) everywhere; with the localized conjugators the far-field
/// displacement of every slice is linear in T.
inline NullPathResult reeb_null_path(double T, double eps, const GridSpec& box = GridSpec{},
                                     const FactorizeParams& params = {}) {
  return null_path_to(DiffeoSpec::reeb_time(T), eps, box, params);
}

/// Null chain across a subdivision 0 = t_0 <= ... <= t_m = 1 of a family:
/// each increment f_{t_{j+1}} o f_{t_j}^{-1} is factorized and its null path
/// right-translated by the composed prefix of earlier increments. m = nullopt
/// doubles from 1 until every increment passes, cap 1024.
inline NullPathResult subdivide_and_connect(const DiffeoFamily& family, std::optional<int> m,
                                            std::optional<double> eps, const GridSpec& box,
                                            const FactorizeParams& params = {}) {
  const int cap = 1 << 10;
  int subdivisions = m.value_or(1);
  for (;; subdivisions *= 2) {
    if (subdivisions > cap)
      throw SubdivisionCapExceeded("subdivision cap " + std::to_string(cap) + " exceeded for " +
                                   family.label);
    try {
      std::vector<DiffeoPath> pieces;
      pieces.reserve(subdivisions);
      double worst_residual = 0.0;
      double used_eps = 0.0;
      double conj_support = 0.0;
      DiffeoSpec prefix;  // composed increments up to the current piece
      for (int j = 0; j < subdivisions; ++j) {
        const double ta = static_cast<double>(j) / subdivisions;
        const double tb = static_cast<double>(j + 1) / subdivisions;
        const DiffeoSpec inc = family_increment(family, ta, tb);
        const double e = eps ? *eps : auto_epsilon(inc, box, params);
        Factorization F = factorize(inc, e, box, params);
        worst_residual = std::max(worst_residual, F.residual_sup);
        conj_support = std::max(conj_support, F.conj.support);
        used_eps = e;
        DiffeoPath piece = factorization_null_path(F);
        pieces.push_back(right_translate(std::move(piece), prefix));
        prefix = prefix.is_identity() ? inc : DiffeoSpec::compose({inc, prefix});
      }
      NullPathResult r;
      r.path = concat(pieces, 1e-8);
      r.path.label = "connect[" + family.label + "]";
      r.eps = used_eps;
      r.subdivisions = subdivisions;
      r.residual_sup = worst_residual;
      r.conj_support = conj_support;
      return r;
    } catch (const NotInNeighborhood&) {
      if (m) throw;  // explicit m: do not retry
    } catch (const InversionFailed&) {
      if (m) throw;
    } catch (const NoFeasibleEpsilon&) {
      if (m) throw;
    }
  }
}

struct PositivePathResult {
  DiffeoPath path;
  double reeb_time = 0.0;
  NullPathResult null_part;
};

/// Positive path from id to f: the pointwise composition ReebTime(tT) o g_t
/// with g a null path from id to ReebTime(-T) o f. The Reeb factor runs on
/// the identity clock, the Reeb translation preserves alpha and g is exactly
/// null, so every velocity sample has alpha = T.
inline PositivePathResult positive_path_to(const DiffeoSpec& f, double T,
                                           std::optional<double> eps, const GridSpec& box,
                                           const FactorizeParams& params = {}) {
  if (!(T > 0.0)) throw ConfigError("positive_path_to requires T > 0");
  const DiffeoSpec target =
      f.is_identity() ? DiffeoSpec::reeb_time(-T)
                      : DiffeoSpec::compose({DiffeoSpec::reeb_time(-T), f});
  PositivePathResult out;
  out.reeb_time = T;
  try {
    out.null_part = null_path_to(target, eps, box, params);
  } catch (const Error&) {
    // One shot failed: connect the Reeb factor by a subdivided chain and
    // right-translate it by f (null paths stay null under right translation).
    NullPathResult chain = subdivide_and_connect(reeb_family(-T), std::nullopt, eps, box, params);
    if (f.is_identity()) {
      out.null_part = std::move(chain);
    } else {
      NullPathResult to_f = null_path_to(f, eps, box, params);
      DiffeoPath translated = right_translate(std::move(chain.path), f);
      out.null_part.path = concat({to_f.path, translated}, 1e-8);
      out.null_part.eps = to_f.eps;
      out.null_part.subdivisions = chain.subdivisions;
      out.null_part.residual_sup = std::max(to_f.residual_sup, chain.residual_sup);
      out.null_part.conj_support = std::max(to_f.conj_support, chain.conj_support);
    }
  }
  out.path = out.null_part.path;
  out.path.reeb_rate = T;
  out.path.label = "positive-path[" + f.describe() + ",T=" + detail::format_number(T) + "]";
  return out;
}

/// Per-slice far-field statistics: sup displacement and sup Jacobian
/// deviation of every time slice on the outer shell (plus the inner-box sup
/// displacement for context).
struct FarFieldReport {
  double shell_sup_displacement = 0.0;
  double shell_sup_jacobian_dev = 0.0;
  double inner_sup_displacement = 0.0;
  std::vector<double> per_time_displacement;
  std::vector<double> per_time_jacobian_dev;
};

inline FarFieldReport far_field_report(const DiffeoPath& path, const GridSpec& inner_box,
                                       const ShellSpec& shell, int time_samples = 16) {
  FarFieldReport rep;
  const std::vector<double> times = uniform_times(time_samples);
  const std::vector<Point> shell_pts = shell.points();
  if (shell_pts.empty())
    throw ConfigError("outer shell sampling is empty; widen the shell or raise its resolution");
  const std::vector<Point> inner_pts = inner_box.points();
  const Mat3 id = Mat3::identity();
  rep.per_time_displacement.reserve(times.size());
  rep.per_time_jacobian_dev.reserve(times.size());
  for (double t : times) {
    const DiffeoSpec slice = path_slice(path, t);
    double disp = 0.0, jdev = 0.0;
    for (const Point& p : shell_pts) {
      disp = std::max(disp, (slice(p) - p).norm());
      jdev = std::max(jdev, (slice.jacobian(p) - id).inf_norm());
    }
    rep.per_time_displacement.push_back(disp);
    rep.per_time_jacobian_dev.push_back(jdev);
    rep.shell_sup_displacement = std::max(rep.shell_sup_displacement, disp);
    rep.shell_sup_jacobian_dev = std::max(rep.shell_sup_jacobian_dev, jdev);
    for (const Point& p : inner_pts)
      rep.inner_sup_displacement = std::max(rep.inner_sup_displacement, (slice(p) - p).norm());
  }
  return rep;
}

}  // namespace csteer
