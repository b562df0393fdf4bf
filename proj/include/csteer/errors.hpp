#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csteer {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Expression / map-source syntax errors, with a 0-based character position.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t pos)
      : Error(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  std::size_t position;
};

/// Evaluation outside the certified domain box.
struct DomainError : Error {
  using Error::Error;
};

/// Newton point inversion failed; the input map is outside the invertibility
/// neighbourhood. Base of the two concrete failure modes.
struct InversionFailed : Error {
  using Error::Error;
};

struct SingularJacobian : InversionFailed {
  using InversionFailed::InversionFailed;
};

struct NoConvergence : InversionFailed {
  using InversionFailed::InversionFailed;
};

/// Near-identity gate failed; caller should subdivide.
struct NotInNeighborhood : Error {
  NotInNeighborhood(const std::string& what, double displacement, double jacobian_deviation)
      : Error(what), max_displacement(displacement), max_jacobian_deviation(jacobian_deviation) {}
  double max_displacement;
  double max_jacobian_deviation;
};

struct NoFeasibleEpsilon : Error {
  using Error::Error;
};

struct JunctionMismatch : Error {
  JunctionMismatch(const std::string& what, double sup) : Error(what), sup_error(sup) {}
  double sup_error;
};

struct SubdivisionCapExceeded : Error {
  using Error::Error;
};

struct PositivityShortfall : Error {
  PositivityShortfall(const std::string& what, double min_alpha)
      : Error(what), min_alpha(min_alpha) {}
  double min_alpha;
};

struct ContainmentFailure : Error {
  using Error::Error;
};

struct StepTooLarge : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace csteer
