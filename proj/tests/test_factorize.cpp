#include <catch2/catch_amalgamated.hpp>

#include "csteer/builtins.hpp"
#include "csteer/factorize.hpp"
#include "support/oracles.hpp"

using namespace csteer;

namespace {
const GridSpec kBox{Box::cube(1.0), 7};
}

TEST_CASE("tau amplitudes") {
  for (const Point& p : oracles::random_box_points(10, 1.0, 61)) {
    const Vec3 t = compute_tau(DiffeoSpec::identity(), 0.5, p);
    CHECK(t.x == 0.0);
    CHECK(t.y == 0.0);
    CHECK(t.z == 0.0);
  }
  // Reeb time-t: (0, -t/eps, t/eps), constants
  for (const Point& p : oracles::random_box_points(10, 1.0, 67)) {
    const Vec3 t = compute_tau(DiffeoSpec::reeb_time(0.2), 0.5, p);
    CHECK(t.x == 0.0);
    CHECK(t.y == -0.4);
    CHECK(t.z == 0.4);
  }
  const Vec3 s = compute_tau(DiffeoSpec::parsed("(x, y + 0.1, z)"), 0.5, {1, 0, 0});
  CHECK(s.x == 0.0);
  CHECK(s.y == Catch::Approx(-0.1).margin(1e-15));
  CHECK(s.z == Catch::Approx(0.2).margin(1e-15));
}

TEST_CASE("pointwise tau identities") {
  const DiffeoSpec maps[] = {DiffeoSpec::parsed("(x + 0.05 * sin(y), y + 0.1 * z, z - 0.05 * x)"),
                             DiffeoSpec::reeb_time(0.3), builtin_map("bumpy:0.2")};
  for (const DiffeoSpec& f : maps) {
    for (const Point& p : oracles::random_box_points(25, 1.0, 71)) {
      const double eps = 0.5;
      const Vec3 t = compute_tau(f, eps, p);
      const Point q = f(p);
      CHECK(eps * t.z == Catch::Approx(q.z - p.z + p.x * (q.y - p.y)).margin(1e-15));
      CHECK(t.y + t.z == Catch::Approx(q.y - p.y).margin(1e-15));
      CHECK(t.x == q.x - p.x);
    }
  }
}

TEST_CASE("tau gradients match finite differences") {
  const DiffeoSpec f = DiffeoSpec::parsed("(x + 0.05 * sin(y), y + 0.1 * z^2, z - 0.05 * x)");
  const TauTriple taus = tau_fields(f, 0.5);
  for (const ScalarField* field : {&taus.tau1, &taus.tau2, &taus.tau3}) {
    for (const Point& p : oracles::random_box_points(10, 0.9, 73)) {
      CHECK((field->gradient(p) - oracles::fd_gradient(*field, p)).norm() < 1e-6);
    }
  }
}

TEST_CASE("partial compositions Phi1, Phi2") {
  const PhiMaps id_phi = build_phi(DiffeoSpec::identity(), 0.5);
  for (const Point& p : oracles::random_box_points(10, 1.0, 79)) {
    CHECK((id_phi.phi1(p) - p).norm() == 0.0);
    CHECK((id_phi.phi2(p) - p).norm() == 0.0);
  }

  const PhiMaps reeb_phi = build_phi(DiffeoSpec::reeb_time(0.2), 0.5);
  const Point a = reeb_phi.phi1({1, 0, 0});
  CHECK(a.x == 1.0);
  CHECK(a.y == Catch::Approx(0.4));
  CHECK(a.z == Catch::Approx(-0.2));
  const Point b = reeb_phi.phi2({1, 0, 0});
  CHECK(b.x == 1.0);
  CHECK(b.y == 0.0);
  CHECK(b.z == Catch::Approx(0.2));

  // Phi2 = phi^Y_{tau2} o phi^Z_{tau3} pointwise equals (x, f_y, f_z)
  const DiffeoSpec f = DiffeoSpec::parsed("(x + 0.05 * y, y + 0.1 * z, z - 0.05 * x)");
  const PhiMaps phi = build_phi(f, 0.5);
  for (const Point& p : oracles::random_box_points(20, 1.0, 83)) {
    const Vec3 t = compute_tau(f, 0.5, p);
    const Point via_flows =
        flow_closed_form(FrameFieldId::Y(), t.y, flow_closed_form(FrameFieldId::Z(0.5), t.z, p));
    CHECK((via_flows - phi.phi2(p)).norm() < 1e-15);
  }

  // Phi Jacobians are exact
  for (const Point& p : oracles::random_box_points(8, 0.9, 89)) {
    CHECK((phi.phi1.jacobian(p) - oracles::fd_jacobian(phi.phi1, p)).inf_norm() < 1e-6);
    CHECK((phi.phi2.jacobian(p) - oracles::fd_jacobian(phi.phi2, p)).inf_norm() < 1e-6);
  }

  // Newton inversion of Phi2 for the shear: forward-compose oracle
  const PhiMaps shear_phi = build_phi(DiffeoSpec::parsed("(x, y + 0.1, z)"), 0.5);
  const Point back = invert_point(shear_phi.phi2, {1, 0.1, 0}, {1, 0.1, 0});
  CHECK(back.x == Catch::Approx(1.0).margin(1e-12));
  CHECK(back.y == Catch::Approx(0.0).margin(1e-12));
  CHECK(back.z == Catch::Approx(0.0).margin(1e-12));
  CHECK((shear_phi.phi2(back) - Point{1, 0.1, 0}).norm() <= 1e-12);
}

TEST_CASE("factorization of the identity") {
  const Factorization F = factorize(DiffeoSpec::identity(), 0.5, kBox);
  for (const Point& p : oracles::random_box_points(10, 1.0, 97)) {
    CHECK(F.a1.value(p) == 0.0);
    CHECK(F.a2.value(p) == 0.0);
    CHECK(F.a3.value(p) == 0.0);
    CHECK((factorization_eval(F, p) - p).norm() < 1e-14);
  }
  CHECK(F.residual_sup < 1e-13);
}

TEST_CASE("factorization of the Reeb map has constant amplitudes") {
  const Factorization F = factorize(DiffeoSpec::reeb_time(0.2), 0.5, kBox);
  for (const Point& p : GridSpec{Box::cube(1.0), 4}.points()) {
    CHECK(F.a1.value(p) == 0.0);
    CHECK(F.a2.value(p) == -0.4);
    CHECK(F.a3.value(p) == 0.4);
  }
  // independent oracle: the closed-form Reeb translation on an 11^3 grid
  const DiffeoSpec reeb = DiffeoSpec::reeb_time(0.2);
  double sup = 0.0;
  for (const Point& p : GridSpec{Box::cube(1.0), 11}.points())
    sup = std::max(sup, (factorization_eval(F, p) - reeb(p)).norm());
  CHECK(sup <= 1e-9);
  const Point q = factorization_eval(F, {0, 0, 0});
  CHECK(q.x == Catch::Approx(0.0).margin(1e-12));
  CHECK(q.y == Catch::Approx(0.0).margin(1e-12));
  CHECK(q.z == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("factorization of a shear against the direct composition oracle") {
  const DiffeoSpec shear = DiffeoSpec::parsed("(x, y + 0.1, z)");
  const Factorization F = factorize(shear, 0.5, kBox);
  double sup = 0.0;
  for (const Point& p : GridSpec{Box::cube(1.0), 11}.points())
    sup = std::max(sup, (factorization_eval(F, p) - shear(p)).norm());
  CHECK(sup <= 1e-8);
  const Point r = factorization_eval(F, {1, 0, 0});
  CHECK(r.x == Catch::Approx(1.0).margin(1e-10));
  CHECK(r.y == Catch::Approx(0.1).margin(1e-10));
  CHECK(r.z == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("the near-identity gate and its errors") {
  CHECK_THROWS_AS(factorize(DiffeoSpec::reeb_time(10.0), 0.5, kBox), NotInNeighborhood);
  try {
    factorize(DiffeoSpec::reeb_time(2.0), 1.0, kBox);
    FAIL("gate should reject displacement 2 at eps 1");
  } catch (const NotInNeighborhood& e) {
    CHECK(e.max_displacement == Catch::Approx(2.0));
  }
}

TEST_CASE("Phi maps inherit the near-identity property with an inflated delta") {
  const DiffeoSpec f = DiffeoSpec::parsed("(x, y + 0.1, z)");
  const double eps = 0.5;
  const NearIdentityReport base = check_near_identity(f, kBox, 1e9);
  const PhiMaps phi = build_phi(f, eps);
  const double inflate = 4.0 / eps;
  const NearIdentityReport r1 = check_near_identity(phi.phi1, kBox, 1e9);
  const NearIdentityReport r2 = check_near_identity(phi.phi2, kBox, 1e9);
  CHECK(r1.max_displacement <= inflate * base.max_displacement + 1e-12);
  CHECK(r2.max_displacement <= inflate * base.max_displacement + 1e-12);
  CHECK(r1.max_jacobian_deviation <= inflate * (base.max_displacement + base.max_jacobian_deviation) + 1e-12);
}

TEST_CASE("auto epsilon ladder") {
  CHECK(auto_epsilon(DiffeoSpec::identity(), kBox) == 1.0);
  const double e = auto_epsilon(DiffeoSpec::reeb_time(0.2), kBox);
  CHECK(e >= 0.25);  // the ladder finds a workable rung well above the floor
  CHECK_THROWS_AS(auto_epsilon(DiffeoSpec::reeb_time(1000.0), kBox), NoFeasibleEpsilon);
}

TEST_CASE("success is monotone along the ladder on the builtin corpus (logged)") {
  // not asserted: the claim is observed empirically, failures are reported
  const char* names[] = {"reeb:0.2", "bumpy:0.1", "bumpham:0.1"};
  for (const char* name : names) {
    const DiffeoSpec f = builtin_map(name);
    bool seen_success = false;
    double eps = 1.0;
    for (int k = 0; k < 6; ++k, eps *= 0.5) {
      bool ok = true;
      try {
        factorize(f, eps, kBox);
      } catch (const Error&) {
        ok = false;
      }
      if (ok) seen_success = true;
      if (seen_success && !ok)
        WARN("monotonicity gap for " << name << " at eps " << eps);
    }
    CHECK(seen_success);
  }
}
