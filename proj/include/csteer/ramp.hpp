#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace csteer {

/// beta(u) = exp(-1/(u(1-u))) on (0,1), 0 outside. The C-infinity bump whose
/// normalized primitive gives the flat ramp used for time warps, cutoffs and
/// bump Hamiltonians.
inline double flat_bump(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double w = u * (1.0 - u);
  return std::exp(-1.0 / w);
}

inline double flat_bump_d1(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double w = u * (1.0 - u);
  return flat_bump(u) * (1.0 - 2.0 * u) / (w * w);
}

namespace detail {

/// Cumulative table of flat_bump with exact nodal derivatives; evaluation by
/// cubic Hermite interpolation. Built once.
struct RampTable {
  static constexpr std::size_t kKnots = 2048;
  std::array<double, kKnots + 1> cum{};
  std::array<double, kKnots + 1> deriv{};
  double total = 0.0;

  RampTable() {
    const double h = 1.0 / kKnots;
    double acc = 0.0;
    cum[0] = 0.0;
    deriv[0] = flat_bump(0.0);
    for (std::size_t k = 0; k < kKnots; ++k) {
      // composite Simpson over [kh, (k+1)h] with 16 panels
      const double a = k * h;
      const int panels = 16;
      const double hh = h / panels;
      double s = 0.0;
      for (int j = 0; j < panels; ++j) {
        const double u0 = a + j * hh;
        s += (hh / 6.0) * (flat_bump(u0) + 4.0 * flat_bump(u0 + 0.5 * hh) + flat_bump(u0 + hh));
      }
      acc += s;
      cum[k + 1] = acc;
      deriv[k + 1] = flat_bump((k + 1) * h);
    }
    total = acc;
  }

  double eval(double a) const {
    if (a <= 0.0) return 0.0;
    if (a >= 1.0) return 1.0;
    const double t = a * kKnots;
    std::size_t k = static_cast<std::size_t>(t);
    if (k >= kKnots) k = kKnots - 1;
    const double h = 1.0 / kKnots;
    const double s = t - k;  // in [0,1)
    const double y0 = cum[k], y1 = cum[k + 1];
    const double d0 = deriv[k] * h, d1 = deriv[k + 1] * h;
    const double s2 = s * s, s3 = s2 * s;
    const double v = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * d0 +
                     (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * d1;
    return v / total;
  }

  double total_mass() const { return total; }
};

inline const RampTable& ramp_table() {
  static const RampTable table;
  return table;
}

}  // namespace detail

/// Flat C-infinity ramp: 0 for a <= 0, 1 for a >= 1, strictly increasing in
/// between, all derivatives vanishing at both ends.
inline double flat_ramp(double a) { return detail::ramp_table().eval(a); }

/// d/da of flat_ramp, in closed form.
inline double flat_ramp_d1(double a) { return flat_bump(a) / detail::ramp_table().total_mass(); }

/// d^2/da^2 of flat_ramp, in closed form.
inline double flat_ramp_d2(double a) { return flat_bump_d1(a) / detail::ramp_table().total_mass(); }

inline double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

inline double smoothstep_d1(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s);
}

/// Reparametrization profiles for segment clocks. FlatCinf flattens all
/// derivatives at junctions; Smoothstep is the cheap C^1 option; Identity is
/// the unwarped clock (used for Reeb factors so positivity keeps its margin).
enum class WarpKind { FlatCinf, Smoothstep, Identity };

inline double warp_sigma(WarpKind k, double s) {
  switch (k) {
    case WarpKind::FlatCinf: return flat_ramp(s);
    case WarpKind::Smoothstep: return smoothstep(s);
    case WarpKind::Identity: return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
  }
  return s;
}

inline double warp_dsigma(WarpKind k, double s) {
  switch (k) {
    case WarpKind::FlatCinf: return flat_ramp_d1(s);
    case WarpKind::Smoothstep: return smoothstep_d1(s);
    case WarpKind::Identity: return (s < 0.0 || s > 1.0) ? 0.0 : 1.0;
  }
  return 1.0;
}

inline const char* warp_name(WarpKind k) {
  switch (k) {
    case WarpKind::FlatCinf: return "flat";
    case WarpKind::Smoothstep: return "smoothstep";
    case WarpKind::Identity: return "identity";
  }
  return "?";
}

}  // namespace csteer
