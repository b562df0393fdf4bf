#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "csteer/diffeo.hpp"
#include "csteer/scalar_field.hpp"
#include "csteer/synthesis.hpp"

namespace csteer {

inline ScalarField field_affine(double offset, double scale, const ScalarField& f) {
  ScalarField out;
  out.label = detail::format_number(offset) + " + " + detail::format_number(scale) + "*(" +
              f.label + ")";
  out.value = [offset, scale, f](const Point& p) { return offset + scale * f.value(p); };
  if (f.has_grad()) out.grad = [scale, f](const Point& p) { return f.gradient(p) * scale; };
  if (f.has_hess()) out.hess = [scale, f](const Point& p) { return f.hessian(p) * scale; };
  if (f.value_and_grad) {
    const auto inner = f.value_and_grad;
    out.value_and_grad = [offset, scale, inner](const Point& p, double& v, Vec3& g) {
      inner(p, v, g);
      v = offset + scale * v;
      g = g * scale;
    };
  }
  return out;
}

/// The shipped extension example: a Hamiltonian with a negative plateau inside
/// the unit ball and value 1 outside it.
inline ScalarField plateau_hamiltonian() { return field_affine(1.0, -2.0, bump_field(0.0, 1.0, 1.0)); }

/// A gentle compactly supported Hamiltonian whose short-time flow slices stay
/// within the near-identity gate; the bump-Hamiltonian member of the
/// factorization corpus.
inline ScalarField soft_bump_hamiltonian() { return bump_field(0.5, 3.0, 0.5); }

namespace detail {

inline std::vector<std::string> split_spec(std::string_view s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = s.find(':', start);
    if (colon == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, colon - start));
    start = colon + 1;
  }
  return parts;
}

inline double spec_number(const std::vector<std::string>& parts, std::size_t idx,
                          const std::string& what) {
  if (idx >= parts.size()) throw ConfigError(what + ": missing numeric parameter");
  try {
    return std::stod(parts[idx]);
  } catch (const std::exception&) {
    throw ConfigError(what + ": bad numeric parameter '" + parts[idx] + "'");
  }
}

}  // namespace detail

/// Named contact Hamiltonians: "one", "x", "tanhz", "plateau",
/// "bump:R_IN:R_OUT:HEIGHT", or any expression in x, y, z.
inline ScalarField builtin_hamiltonian(std::string_view spec) {
  const auto parts = detail::split_spec(spec);
  const std::string& name = parts[0];
  if (name == "one") return constant_field(1.0);
  if (name == "x") return field_from_source("x");
  if (name == "tanhz") return field_from_source("tanh(z)");
  if (name == "plateau") return plateau_hamiltonian();
  if (name == "softbump") return soft_bump_hamiltonian();
  if (name == "bump")
    return bump_field(detail::spec_number(parts, 1, "bump"), detail::spec_number(parts, 2, "bump"),
                      detail::spec_number(parts, 3, "bump"));
  return field_from_source(spec);
}

/// Named map families: "id", "reeb:T", "xflow:T", "yflow:T", "zflow:EPS:T",
/// "scale:L", "bumpy:C" (compactly supported bump shear), "bumpham:T",
/// "tanhham:T".
inline DiffeoSpec builtin_map(std::string_view spec) {
  const auto parts = detail::split_spec(spec);
  const std::string& name = parts[0];
  if (name == "id") return DiffeoSpec::identity();
  if (name == "reeb") return DiffeoSpec::reeb_time(detail::spec_number(parts, 1, name));
  if (name == "xflow")
    return DiffeoSpec::frame_flow(FrameFieldId::X(), detail::spec_number(parts, 1, name));
  if (name == "yflow")
    return DiffeoSpec::frame_flow(FrameFieldId::Y(), detail::spec_number(parts, 1, name));
  if (name == "zflow")
    return DiffeoSpec::frame_flow(FrameFieldId::Z(detail::spec_number(parts, 1, name)),
                                  detail::spec_number(parts, 2, name));
  if (name == "scale") return DiffeoSpec::scale(detail::spec_number(parts, 1, name));
  if (name == "bumpy") return DiffeoSpec::bump_shear(detail::spec_number(parts, 1, name));
  if (name == "bumpham")
    return DiffeoSpec::hamiltonian_slice(soft_bump_hamiltonian(),
                                         detail::spec_number(parts, 1, name));
  if (name == "tanhham")
    return DiffeoSpec::hamiltonian_slice(field_from_source("tanh(z)"),
                                         detail::spec_number(parts, 1, name));
  throw ConfigError("unknown builtin map '" + std::string(spec) + "'");
}

/// Named time-indexed families for connect/extend: "reeb:T", "bumpham:T",
/// "tanhham:T", "yflow:T".
inline DiffeoFamily builtin_family(std::string_view spec) {
  const auto parts = detail::split_spec(spec);
  const std::string& name = parts[0];
  if (name == "reeb") return reeb_family(detail::spec_number(parts, 1, name));
  if (name == "bumpham")
    return hamiltonian_family(soft_bump_hamiltonian(), detail::spec_number(parts, 1, name));
  if (name == "tanhham")
    return hamiltonian_family(field_from_source("tanh(z)"), detail::spec_number(parts, 1, name));
  if (name == "yflow") {
    const double T = detail::spec_number(parts, 1, name);
    DiffeoFamily fam;
    fam.at = [T](double t) { return DiffeoSpec::frame_flow(FrameFieldId::Y(), t * T); };
    fam.increment = [T](double ta, double tb) {
      return DiffeoSpec::frame_flow(FrameFieldId::Y(), (tb - ta) * T);
    };
    fam.label = "yflow-family(" + detail::format_number(T) + ")";
    return fam;
  }
  throw ConfigError("unknown builtin family '" + std::string(spec) + "'");
}

}  // namespace csteer
