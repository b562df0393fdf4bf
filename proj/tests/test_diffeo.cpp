#include <catch2/catch_amalgamated.hpp>

#include "csteer/builtins.hpp"
#include "csteer/diffeo.hpp"
#include "support/oracles.hpp"

using namespace csteer;

TEST_CASE("evaluation and Jacobians of the basic representations") {
  const DiffeoSpec id = DiffeoSpec::identity();
  const Point p{0.4, -0.2, 0.9};
  CHECK((id(p) - p).norm() == 0.0);
  CHECK((id.jacobian(p) - Mat3::identity()).inf_norm() == 0.0);

  const DiffeoSpec shear = DiffeoSpec::parsed("(x, y + 0.1, z)");
  const Point q = shear({1, 0, 0});
  CHECK(q.x == 1.0);
  CHECK(q.y == 0.1);
  CHECK(q.z == 0.0);
  CHECK((shear.jacobian({1, 0, 0}) - Mat3::identity()).inf_norm() == 0.0);

  const DiffeoSpec yf = DiffeoSpec::frame_flow(FrameFieldId::Y(), 1.0);
  const Point r = yf({2, 0, 0});
  CHECK(r.x == 2.0);
  CHECK(r.y == 1.0);
  CHECK(r.z == -2.0);
  const Mat3 J = yf.jacobian({2, 0, 0});
  CHECK(J.row[2].x == -1.0);
  CHECK(J.row[2].y == 0.0);
  CHECK(J.row[2].z == 1.0);
}

TEST_CASE("Jacobians match finite differences across the builtin corpus") {
  const char* names[] = {"id",        "reeb:0.2", "xflow:0.4", "yflow:0.3", "zflow:0.5:0.2",
                         "scale:1.2", "bumpy:0.1", "bumpham:0.1", "tanhham:0.2"};
  for (const char* name : names) {
    const DiffeoSpec f = builtin_map(name);
    for (const Point& p : oracles::random_box_points(8, 1.0, 29)) {
      const Mat3 exact = f.jacobian(p);
      const Mat3 fd = oracles::fd_jacobian(f, p);
      CHECK((exact - fd).inf_norm() < 1e-6 * (1.0 + exact.inf_norm()));
    }
  }
  const DiffeoSpec parsed = DiffeoSpec::parsed("(x + 0.1 * sin(y), y + 0.05 * z^2, z - 0.1 * x)");
  for (const Point& p : oracles::random_box_points(8, 1.0, 31)) {
    CHECK((parsed.jacobian(p) - oracles::fd_jacobian(parsed, p)).inf_norm() < 1e-6);
  }
}

TEST_CASE("Newton point inversion") {
  const DiffeoSpec id = DiffeoSpec::identity();
  const Point q{1, 2, 3};
  CHECK((invert_point(id, q, {0, 0, 0}) - q).norm() == 0.0);

  const DiffeoSpec reeb = DiffeoSpec::reeb_time(0.2);
  const Point r = invert_point(reeb, {0, 0, 0.2}, {0, 0, 0.2});
  CHECK(r.norm() < 1e-12);

  // forward-compose oracle on a non-affine near-identity map
  const DiffeoSpec f = DiffeoSpec::parsed("(x + 0.1 * sin(y), y + 0.05 * z^2, z - 0.1 * x)");
  for (const Point& p : oracles::random_box_points(20, 0.8, 41)) {
    const Point image = f(p);
    const Point back = invert_point(f, image, image);
    CHECK((f(back) - image).norm() <= 1e-11);
    CHECK((back - p).norm() < 1e-10);
  }
}

TEST_CASE("inversion failure modes") {
  // the fold map (x^3 has singular Jacobian at x = 0) cannot be Newton-inverted there
  const DiffeoSpec fold = DiffeoSpec::parsed("(x^3, y, z)");
  CHECK_THROWS_AS(invert_point(fold, {0.5, 0, 0}, {0, 0, 0}), InversionFailed);
}

TEST_CASE("near-identity certificate") {
  const GridSpec grid{Box::cube(1.0), 5};
  CHECK(check_near_identity(DiffeoSpec::identity(), grid, 1e-12).ok);

  const NearIdentityReport far = check_near_identity(DiffeoSpec::reeb_time(10.0), grid, 0.5);
  CHECK_FALSE(far.ok);
  CHECK(far.max_displacement == Catch::Approx(10.0));

  const NearIdentityReport s =
      check_near_identity(DiffeoSpec::parsed("(x, y + 0.1, z)"), grid, 0.2);
  CHECK(s.ok);
  CHECK(s.max_displacement == Catch::Approx(0.1));
  CHECK(s.max_jacobian_deviation == 0.0);
}

TEST_CASE("conformal factor") {
  const GridSpec grid{Box::cube(1.0), 4};
  for (const Point& p : grid.points()) {
    CHECK(conformal_factor(DiffeoSpec::reeb_time(0.7), p) == 1.0);
    CHECK(conformal_factor(DiffeoSpec::identity(), p) == 1.0);
    // symbolic pullback of alpha under (lx, ly, l^2 z) multiplies it by l^2
    CHECK(conformal_factor(DiffeoSpec::scale(2.0), p) == 4.0);
  }
}

TEST_CASE("kernel deviation distinguishes contactomorphisms") {
  const GridSpec grid{Box::cube(1.0), 4};
  CHECK(kernel_deviation(DiffeoSpec::reeb_time(0.4), grid) == 0.0);
  CHECK(kernel_deviation(DiffeoSpec::scale(2.0), grid) == 0.0);
  // an X-translation is not a contactomorphism
  CHECK(kernel_deviation(DiffeoSpec::frame_flow(FrameFieldId::X(), 0.5), grid) > 0.1);
}

TEST_CASE("composition evaluates in either grouping exactly") {
  const DiffeoSpec f = DiffeoSpec::parsed("(x, y + 0.1, z)");
  const DiffeoSpec g = DiffeoSpec::reeb_time(0.3);
  const DiffeoSpec h = DiffeoSpec::frame_flow(FrameFieldId::Y(), 0.2);
  const DiffeoSpec left = DiffeoSpec::compose({DiffeoSpec::compose({f, g}), h});
  const DiffeoSpec right = DiffeoSpec::compose({f, DiffeoSpec::compose({g, h})});
  for (const Point& p : oracles::random_box_points(20, 1.0, 53)) {
    const Point a = left(p), b = right(p);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.z == b.z);
  }
}

TEST_CASE("known inverses and the Newton-backed fallback") {
  const DiffeoSpec yf = DiffeoSpec::frame_flow(FrameFieldId::Y(), 0.8);
  const DiffeoSpec yb = yf.inverse();
  const DiffeoSpec parsed = DiffeoSpec::parsed("(x + 0.1 * sin(y), y, z)");
  const DiffeoSpec pinv = parsed.inverse();
  for (const Point& p : oracles::random_box_points(10, 1.0, 59)) {
    CHECK((yb(yf(p)) - p).norm() < 1e-14);
    CHECK((pinv(parsed(p)) - p).norm() < 1e-10);
  }
}

TEST_CASE("evaluation outside the certified box is rejected") {
  const DiffeoSpec parsed = DiffeoSpec::parsed("(x, y, z)", Box::cube(2.0));
  CHECK_THROWS_AS(parsed({5, 0, 0}), DomainError);
}
