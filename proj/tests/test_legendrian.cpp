#include <catch2/catch_amalgamated.hpp>

#include "csteer/builtins.hpp"
#include "csteer/legendrian.hpp"
#include "csteer/synthesis.hpp"

using namespace csteer;

namespace {
const GridSpec kBox{Box::cube(1.0), 5};
}

TEST_CASE("1-jets are Legendrian") {
  // u == 0: the y-axis with tangents (0, 1, 0)
  const LegendrianSample zero = jet_legendrian(parse_field1d("0 * y"), -1.0, 1.0, 11);
  for (std::size_t i = 0; i < zero.points.size(); ++i) {
    CHECK(zero.points[i].x == 0.0);
    CHECK(zero.points[i].z == 0.0);
    CHECK(zero.tangents[i].vec.y == 1.0);
    CHECK(alpha_eval(zero.tangents[i]) == 0.0);
  }

  // u = y^2/2 parametrizes y -> (-y, y, y^2/2) with tangent (-1, 1, y)
  const LegendrianSample para = jet_legendrian(parse_field1d("y^2 / 2"), -1.0, 1.0, 21);
  CHECK(legendrian_deviation(para) == 0.0);
  for (std::size_t i = 0; i < para.points.size(); ++i) {
    const double y = para.params[i];
    CHECK(para.points[i].x == -y);
    CHECK(para.points[i].z == Catch::Approx(y * y / 2));
    CHECK(para.tangents[i].vec.x == -1.0);
    CHECK(para.tangents[i].vec.z == y);
  }

  // transcendental generator
  const LegendrianSample wave = jet_legendrian(parse_field1d("sin(y)"), -1.0, 1.0, 21);
  CHECK(legendrian_deviation(wave) <= 1e-10);
  for (std::size_t i = 0; i < wave.points.size(); ++i)
    CHECK(wave.points[i].x == Catch::Approx(-std::cos(wave.params[i])));
}

TEST_CASE("transport under a stationary path is constant") {
  const LegendrianSample L = jet_legendrian(parse_field1d("y^2 / 2"), -1.0, 1.0, 9);
  PathBuilder b(Box::cube(1.0));
  b.add_stationary();
  const IsotopySample iso = transport(L, b.finish(), 8);
  CHECK(iso.max_abs_alpha == 0.0);
  CHECK(isotopy_classify(iso) == Verdict::Null);
  for (std::size_t i = 0; i < L.points.size(); ++i)
    CHECK((iso.frames.back().points[i] - L.points[i]).norm() == 0.0);
}

TEST_CASE("transport under a synthesized null path") {
  const LegendrianSample L = jet_legendrian(parse_field1d("0 * y"), -0.8, 0.8, 9);
  const NullPathResult r = reeb_null_path(0.2, 0.5, kBox);
  const IsotopySample iso = transport(L, r.path, 16);
  CHECK(iso.max_abs_alpha == 0.0);  // closed-form horizontal velocities
  CHECK(isotopy_classify(iso) == Verdict::Null);
  // endpoint: the jet translated by (0, 0, 0.2)
  for (std::size_t i = 0; i < L.points.size(); ++i) {
    const Point q = iso.frames.back().points[i];
    CHECK((q - (L.points[i] + Vec3{0, 0, 0.2})).norm() <= 1e-9);
  }
}

TEST_CASE("transport under a positive path has the uniform Reeb margin") {
  const LegendrianSample L = jet_legendrian(parse_field1d("y^2 / 2"), -0.8, 0.8, 9);
  const PositivePathResult r =
      positive_path_to(DiffeoSpec::reeb_time(0.2), 0.2, std::nullopt, kBox);
  const IsotopySample iso = transport(L, r.path, 16);
  CHECK(iso.min_alpha == 0.2);
  CHECK(iso.max_alpha == 0.2);
  CHECK(isotopy_classify(iso) == Verdict::Positive);
}

TEST_CASE("contactomorphism slices preserve the Legendrian condition") {
  const LegendrianSample L = jet_legendrian(parse_field1d("y^2 / 2"), -0.8, 0.8, 9);
  // a pure Reeb leg: every slice is a contactomorphism
  PathBuilder rb(Box::cube(1.0));
  rb.add_reparam(FrameFieldId::Reeb(), constant_field(0.3), WarpKind::Identity);
  const IsotopySample reeb_iso = transport(L, rb.finish(), 8);
  CHECK(reeb_iso.max_tangent_alpha <= 1e-12);
  // a Hamiltonian flow leg: contact slices up to integrator accuracy
  PathBuilder hb(Box::cube(1.0));
  hb.add_hamiltonian(field_from_source("tanh(z)"), 0.4, 1.0 / 64, WarpKind::Identity);
  const IsotopySample ham_iso = transport(L, hb.finish(), 8);
  CHECK(ham_iso.max_tangent_alpha <= 1e-6);
}

TEST_CASE("isotopy with alternating sign classifies mixed") {
  const LegendrianSample L = jet_legendrian(parse_field1d("0 * y"), -0.5, 0.5, 5);
  PathBuilder fwd(Box::cube(1.0));
  fwd.add_reparam(FrameFieldId::Reeb(), constant_field(0.2));
  PathBuilder bwd(Box::cube(1.0));
  bwd.add_reparam(FrameFieldId::Reeb(), constant_field(-0.2));
  DiffeoPath back = right_translate(bwd.finish(), DiffeoSpec::reeb_time(0.2));
  const DiffeoPath loop = concat({fwd.finish(), back});
  const IsotopySample iso = transport(L, loop, 16);
  CHECK(isotopy_classify(iso) == Verdict::Mixed);
}

TEST_CASE("point counts stay constant across time") {
  const LegendrianSample L = jet_legendrian(parse_field1d("sin(y)"), -0.5, 0.5, 7);
  const NullPathResult r = null_path_to(DiffeoSpec::parsed("(x, y + 0.1, z)"), 0.5, kBox);
  const IsotopySample iso = transport(L, r.path, 8);
  for (const LegendrianSample& frame : iso.frames) {
    CHECK(frame.points.size() == L.points.size());
    CHECK(frame.tangents.size() == L.points.size());
  }
}
