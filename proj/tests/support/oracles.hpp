#pragma once

// Test-side oracles, independent of the library paths they check: central
// finite differences for Jacobians/gradients, a plain textbook RK4, and
// seeded sample generators. The dyadic-x samples make x +- eps exact in
// binary floating point, so translation-conjugation identities can be
// asserted bitwise.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "csteer/diffeo.hpp"
#include "csteer/geometry.hpp"
#include "csteer/scalar_field.hpp"

namespace oracles {

using csteer::Box;
using csteer::DiffeoSpec;
using csteer::Mat3;
using csteer::Point;
using csteer::ScalarField;
using csteer::Vec3;

inline Mat3 fd_jacobian(const DiffeoSpec& f, const Point& p, double h = 1e-5) {
  Mat3 j;
  const Vec3 e[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int c = 0; c < 3; ++c) {
    const Point a = f(p + e[c] * h);
    const Point b = f(p - e[c] * h);
    const Vec3 col = (a - b) * (1.0 / (2.0 * h));
    j.row[0].x = c == 0 ? col.x : j.row[0].x;
    j.row[1].x = c == 0 ? col.y : j.row[1].x;
    j.row[2].x = c == 0 ? col.z : j.row[2].x;
    j.row[0].y = c == 1 ? col.x : j.row[0].y;
    j.row[1].y = c == 1 ? col.y : j.row[1].y;
    j.row[2].y = c == 1 ? col.z : j.row[2].y;
    j.row[0].z = c == 2 ? col.x : j.row[0].z;
    j.row[1].z = c == 2 ? col.y : j.row[1].z;
    j.row[2].z = c == 2 ? col.z : j.row[2].z;
  }
  return j;
}

inline Vec3 fd_gradient(const ScalarField& f, const Point& p, double h = 1e-5) {
  const Vec3 e[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  Vec3 g;
  g.x = (f.value(p + e[0] * h) - f.value(p - e[0] * h)) / (2 * h);
  g.y = (f.value(p + e[1] * h) - f.value(p - e[1] * h)) / (2 * h);
  g.z = (f.value(p + e[2] * h) - f.value(p - e[2] * h)) / (2 * h);
  return g;
}

/// Plain textbook RK4 on a raw callable, kept independent of the library
/// integrator.
template <typename Field>
inline Point plain_rk4(Field&& field, double t, Point p, int steps) {
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const Vec3 k1 = field(p);
    const Vec3 k2 = field(p + k1 * (h / 2));
    const Vec3 k3 = field(p + k2 * (h / 2));
    const Vec3 k4 = field(p + k3 * h);
    p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
  }
  return p;
}

inline std::vector<Point> random_box_points(std::size_t count, double half_width,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half_width, half_width);
  std::vector<Point> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  return pts;
}

/// Random points whose x coordinate lies on a 30-bit dyadic grid, so x +- eps
/// is exact for eps with short binary expansion.
inline std::vector<Point> random_dyadic_x_points(std::size_t count, double half_width,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half_width, half_width);
  std::uniform_int_distribution<std::int64_t> k(-(1 << 30), 1 << 30);
  std::vector<Point> pts;
  pts.reserve(count);
  const double scale = half_width / static_cast<double>(1 << 30);
  for (std::size_t i = 0; i < count; ++i)
    pts.push_back({static_cast<double>(k(rng)) * scale, u(rng), u(rng)});
  return pts;
}

}  // namespace oracles
