#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "csteer/errors.hpp"
#include "csteer/geometry.hpp"

namespace csteer {

/// A regular lattice on a box, endpoints included. The sampling spec used by
/// certification sweeps, verification reports and the CLI --grid flag.
struct GridSpec {
  Box box = Box::cube(1.0);
  int n = 11;  // samples per axis

  std::vector<Point> points() const {
    if (n < 1) throw ConfigError("grid needs at least one sample per axis");
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(n) * n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out.push_back(at(i, j, k));
    return out;
  }

  Point at(int i, int j, int k) const {
    auto coord = [this](double lo, double hi, int idx) {
      return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx / (n - 1);
    };
    return {coord(box.lo.x, box.hi.x, i), coord(box.lo.y, box.hi.y, j),
            coord(box.lo.z, box.hi.z, k)};
  }
};

/// Samples of the radial shell r_inner <= |p| <= r_outer, taken from the
/// enclosing box lattice.
struct ShellSpec {
  double r_inner = 2.0;
  double r_outer = 4.0;
  int n = 9;

  std::vector<Point> points() const {
    GridSpec g{Box::cube(r_outer), n};
    std::vector<Point> out;
    for (const Point& p : g.points()) {
      const double r = p.norm();
      if (r >= r_inner && r <= r_outer) out.push_back(p);
    }
    return out;
  }
};

/// Ball samples |p| <= radius from the enclosing lattice (always includes 0
/// when n is odd).
inline std::vector<Point> ball_points(double radius, int n) {
  GridSpec g{Box::cube(radius), n};
  std::vector<Point> out;
  for (const Point& p : g.points())
    if (p.norm() <= radius) out.push_back(p);
  return out;
}

/// Sphere-ish samples at |p| = radius (lattice points of the enclosing box
/// projected to the sphere). Deterministic.
inline std::vector<Point> sphere_points(double radius, int n) {
  GridSpec g{Box::cube(1.0), n};
  std::vector<Point> out;
  for (const Point& p : g.points()) {
    const double r = p.norm();
    if (r < 1e-9) continue;
    out.push_back(p * (radius / r));
  }
  return out;
}

/// Uniform random points in a box from a seeded engine.
inline std::vector<Point> random_points(const Box& box, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y),
      uz(box.lo.z, box.hi.z);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back({ux(rng), uy(rng), uz(rng)});
  return out;
}

/// Chunked parallel loop over [0, n). Results must be written to disjoint
/// per-index slots so the outcome is independent of scheduling. Falls back to
/// a serial loop on single-core hosts.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const unsigned workers = std::min<unsigned>(hw, 16);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace csteer
