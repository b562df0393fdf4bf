#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "csteer/errors.hpp"

namespace csteer {

/// A vector in coordinates (x, y, z). Used both for points of R^3 and for
/// tangent components. All values are dimensionless.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double max_abs() const { return std::max({std::fabs(x), std::fabs(y), std::fabs(z)}); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// A point of the standard contact R^3 with coordinates (x, y, z).
using Point = Vec3;

/// A tangent vector attached to a base point.
struct Tangent {
  Point base;
  Vec3 vec;
};

/// Row-major 3x3 matrix. Rows are Vec3 gradients of the output coordinates.
struct Mat3 {
  std::array<Vec3, 3> row{};

  static constexpr Mat3 identity() {
    Mat3 m;
    m.row[0] = {1, 0, 0};
    m.row[1] = {0, 1, 0};
    m.row[2] = {0, 0, 1};
    return m;
  }

  static constexpr Mat3 zero() { return Mat3{}; }

  Vec3 operator*(const Vec3& v) const {
    return {row[0].x * v.x + row[0].y * v.y + row[0].z * v.z,
            row[1].x * v.x + row[1].y * v.y + row[1].z * v.z,
            row[2].x * v.x + row[2].y * v.y + row[2].z * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
      r.row[i] = {row[i].x * o.row[0].x + row[i].y * o.row[1].x + row[i].z * o.row[2].x,
                  row[i].x * o.row[0].y + row[i].y * o.row[1].y + row[i].z * o.row[2].y,
                  row[i].x * o.row[0].z + row[i].y * o.row[1].z + row[i].z * o.row[2].z};
    }
    return r;
  }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) r.row[i] = row[i] + o.row[i];
    return r;
  }

  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) r.row[i] = row[i] - o.row[i];
    return r;
  }

  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) r.row[i] = row[i] * s;
    return r;
  }

  Mat3 transpose() const {
    Mat3 r;
    r.row[0] = {row[0].x, row[1].x, row[2].x};
    r.row[1] = {row[0].y, row[1].y, row[2].y};
    r.row[2] = {row[0].z, row[1].z, row[2].z};
    return r;
  }

  double det() const {
    return row[0].x * (row[1].y * row[2].z - row[1].z * row[2].y) -
           row[0].y * (row[1].x * row[2].z - row[1].z * row[2].x) +
           row[0].z * (row[1].x * row[2].y - row[1].y * row[2].x);
  }

  /// Induced infinity norm (max absolute row sum).
  double inf_norm() const {
    double n = 0.0;
    for (const auto& r : row)
      n = std::max(n, std::fabs(r.x) + std::fabs(r.y) + std::fabs(r.z));
    return n;
  }

  /// u v^T.
  static Mat3 outer(const Vec3& u, const Vec3& v) {
    Mat3 r;
    r.row[0] = v * u.x;
    r.row[1] = v * u.y;
    r.row[2] = v * u.z;
    return r;
  }
};

/// Solve M s = b by Gaussian elimination with partial pivoting.
/// Throws SingularJacobian when the pivot falls below `pivot_tol` times the
/// matrix scale.
inline Vec3 solve3(const Mat3& m, const Vec3& b, double pivot_tol = 1e-13) {
  double a[3][4] = {{m.row[0].x, m.row[0].y, m.row[0].z, b.x},
                    {m.row[1].x, m.row[1].y, m.row[1].z, b.y},
                    {m.row[2].x, m.row[2].y, m.row[2].z, b.z}};
  const double scale = std::max(m.inf_norm(), 1e-300);
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < pivot_tol * scale)
      throw SingularJacobian("singular Jacobian in 3x3 solve");
    if (piv != col)
      for (int c = 0; c < 4; ++c) std::swap(a[piv][c], a[col][c]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return {a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]};
}

inline Mat3 inverse3(const Mat3& m, double pivot_tol = 1e-13) {
  Mat3 inv;
  const Vec3 e[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int c = 0; c < 3; ++c) {
    const Vec3 col = solve3(m, e[c], pivot_tol);
    inv.row[0].x = (c == 0) ? col.x : inv.row[0].x;
    inv.row[1].x = (c == 0) ? col.y : inv.row[1].x;
    inv.row[2].x = (c == 0) ? col.z : inv.row[2].x;
    inv.row[0].y = (c == 1) ? col.x : inv.row[0].y;
    inv.row[1].y = (c == 1) ? col.y : inv.row[1].y;
    inv.row[2].y = (c == 1) ? col.z : inv.row[2].y;
    inv.row[0].z = (c == 2) ? col.x : inv.row[0].z;
    inv.row[1].z = (c == 2) ? col.y : inv.row[1].z;
    inv.row[2].z = (c == 2) ? col.z : inv.row[2].z;
  }
  return inv;
}

/// Axis-aligned box, the region on which numerical work is certified.
struct Box {
  Point lo{-1, -1, -1};
  Point hi{1, 1, 1};

  static Box cube(double half_width) {
    return Box{{-half_width, -half_width, -half_width}, {half_width, half_width, half_width}};
  }

  bool contains(const Point& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }

  Box inflated(double margin) const {
    return Box{{lo.x - margin, lo.y - margin, lo.z - margin},
               {hi.x + margin, hi.y + margin, hi.z + margin}};
  }

  double max_abs_coord() const {
    double m = 0.0;
    m = std::max(m, std::max(std::fabs(lo.x), std::fabs(hi.x)));
    m = std::max(m, std::max(std::fabs(lo.y), std::fabs(hi.y)));
    m = std::max(m, std::max(std::fabs(lo.z), std::fabs(hi.z)));
    return m;
  }

  double max_abs_x() const { return std::max(std::fabs(lo.x), std::fabs(hi.x)); }
};

/// alpha = dz + x dy evaluated on a tangent vector: v_z + x * v_y.
inline double alpha_eval(const Tangent& t) { return t.vec.z + t.base.x * t.vec.y; }

inline double alpha_eval(const Point& base, const Vec3& vec) { return vec.z + base.x * vec.y; }

/// Dimension-generic alpha = dz + sum_i x_i dy_i on R^(2n+1), coordinates
/// ordered (x_1..x_n, y_1..y_n, z). Only the n = 1 layer has frame fields,
/// flows and factorization; those are hard errors for other n.
template <std::size_t N>
double alpha_eval_generic(std::span<const double, 2 * N + 1> coords,
                          std::span<const double, 2 * N + 1> vec) {
  double a = vec[2 * N];
  for (std::size_t i = 0; i < N; ++i) a += coords[i] * vec[N + i];
  return a;
}

template <std::size_t N>
struct FrameFormulas {
  static_assert(N == 1, "frame fields and flows are implemented for the three-dimensional case only");
};

inline void require_finite(const Point& p, const char* what) {
  if (!p.finite()) throw Error(std::string(what) + ": non-finite coordinates");
}

}  // namespace csteer
