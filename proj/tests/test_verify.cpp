#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "csteer/builtins.hpp"
#include "csteer/synthesis.hpp"
#include "csteer/verify.hpp"

using namespace csteer;

namespace {
const GridSpec kBox{Box::cube(1.0), 5};

VerifyConfig small_config() {
  VerifyConfig cfg;
  cfg.grid = kBox;
  cfg.tol = 1e-9;
  cfg.time_samples = 12;
  return cfg;
}
}  // namespace

TEST_CASE("verification report of a null path") {
  const DiffeoSpec shear = DiffeoSpec::parsed("(x, y + 0.1, z)");
  const NullPathResult r = null_path_to(shear, std::nullopt, kBox);
  const VerificationReport rep = verify(r.path, &shear, small_config());
  CHECK(rep.verdict == Verdict::Null);
  CHECK(*rep.endpoint_sup_error <= 1e-6);
  CHECK(rep.hofer == 0.0);
}

TEST_CASE("verification report of a positive loop") {
  const PositivePathResult r = positive_path_to(DiffeoSpec::identity(), 1.0, std::nullopt, kBox);
  const VerificationReport rep = verify(r.path, nullptr, small_config());
  CHECK(rep.verdict == Verdict::Positive);
  CHECK(rep.hofer == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("a deliberately corrupted path classifies mixed") {
  // a Reeb leg followed by its reversal: alphas of both signs
  PathBuilder fwd(Box::cube(1.0));
  fwd.add_reparam(FrameFieldId::Reeb(), constant_field(0.4));
  PathBuilder bwd(Box::cube(1.0));
  bwd.add_reparam(FrameFieldId::Reeb(), constant_field(-0.4));
  const DiffeoPath loop =
      concat({fwd.finish(), right_translate(bwd.finish(), DiffeoSpec::reeb_time(0.4))});
  CHECK(verify(loop, nullptr, small_config()).verdict == Verdict::Mixed);
}

TEST_CASE("reports are deterministic") {
  const DiffeoSpec shear = DiffeoSpec::parsed("(x, y + 0.1, z)");
  const NullPathResult r1 = null_path_to(shear, 0.5, kBox);
  const NullPathResult r2 = null_path_to(shear, 0.5, kBox);
  const std::string a = report_to_json(verify(r1.path, &shear, small_config())).dump(2);
  const std::string b = report_to_json(verify(r2.path, &shear, small_config())).dump(2);
  CHECK(a == b);
}

TEST_CASE("path samples round-trip through JSONL") {
  const NullPathResult r = reeb_null_path(0.2, 0.5, kBox);
  const VerifyConfig cfg = small_config();
  std::stringstream ss;
  write_path_jsonl(ss, r.path, cfg, Verdict::Null);
  const PathSamples ps = read_path_jsonl(ss);
  CHECK(ps.header.at("schema") == "csteer-path-samples");
  CHECK(ps.header.at("verdict") == "null");
  CHECK(ps.samples.size() == static_cast<std::size_t>((cfg.time_samples + 1)) * kBox.points().size());

  const DiffeoSpec target = DiffeoSpec::reeb_time(0.2);
  const SampleVerification v = verify_samples(ps.samples, &target, cfg.tol);
  CHECK(v.verdict == Verdict::Null);
  CHECK(v.hofer == 0.0);
  CHECK(*v.endpoint_sup_error <= 1e-9);
}

TEST_CASE("sample verification flags wrong targets") {
  const NullPathResult r = reeb_null_path(0.2, 0.5, kBox);
  std::stringstream ss;
  write_path_jsonl(ss, r.path, small_config(), Verdict::Null);
  const PathSamples ps = read_path_jsonl(ss);
  const DiffeoSpec wrong = DiffeoSpec::reeb_time(0.5);
  const SampleVerification v = verify_samples(ps.samples, &wrong, 1e-9);
  CHECK(*v.endpoint_sup_error > 0.1);
}

TEST_CASE("isotopy samples serialize") {
  const LegendrianSample L = jet_legendrian(parse_field1d("y^2 / 2"), -0.5, 0.5, 5);
  const NullPathResult r = reeb_null_path(0.2, 0.5, kBox);
  const IsotopySample iso = transport(L, r.path, 6);
  std::stringstream ss;
  write_isotopy_jsonl(ss, iso, "test");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(ss, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 1 + iso.times.size() * L.points.size());
}
