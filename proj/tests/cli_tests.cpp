#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end exercises of the command-line surface: exit-status contract and
// byte-level determinism of reports.

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CSTEER_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("factorize subcommand succeeds and is deterministic") {
  CHECK(run("factorize --builtin reeb:0.2 --eps 0.5 --box 1 --grid 7 --out cli_f1.json") == 0);
  CHECK(run("factorize --builtin reeb:0.2 --eps 0.5 --box 1 --grid 7 --out cli_f2.json") == 0);
  const std::string a = slurp("cli_f1.json");
  const std::string b = slurp("cli_f2.json");
  REQUIRE_FALSE(a.empty());
  CHECK(a == b);
}

TEST_CASE("null-path emits samples that re-verify") {
  CHECK(run("null-path --map \"(x, y + 0.1, z)\" --auto-eps --grid 5 --time-samples 8 "
            "--out cli_np.json --samples cli_np.jsonl") == 0);
  CHECK(run("verify --path cli_np.jsonl --target \"(x, y + 0.1, z)\"") == 0);
  // verdict mismatch is a verification failure
  CHECK(run("verify --path cli_np.jsonl --expect positive") == 1);
}

TEST_CASE("missing inputs and bad usage exit 2") {
  CHECK(run("verify --path missing.jsonl") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("null-path") == 2);                       // neither --map nor --builtin
  CHECK(run("null-path --map \"(x, y)\"") == 2);      // arity error
  CHECK(run("factorize --builtin nosuch:1") == 2);
}

TEST_CASE("positive-path and connect succeed") {
  CHECK(run("positive-path --builtin id --reeb-time 1 --grid 5 --time-samples 8 "
            "--out cli_pp.json") == 0);
  CHECK(run("connect --family reeb:2 --grid 5 --time-samples 8 --out cli_cn.json") == 0);
}

TEST_CASE("legendrian transport from a recipe file") {
  REQUIRE(run("null-path --map \"(x, y + 0.1, z)\" --auto-eps --grid 5 --time-samples 8 "
              "--out cli_np2.json") == 0);
  CHECK(run("legendrian --jet \"y^2 / 2\" --path-from cli_np2.json --grid 5 --time-samples 8 "
            "--out cli_lg.json --isotopy-out cli_lg.jsonl") == 0);
  const std::string rep = slurp("cli_lg.json");
  CHECK(rep.find("\"verdict\": \"null\"") != std::string::npos);
}

TEST_CASE("extend subcommand (coarse grids)") {
  CHECK(run("extend --verify-grid 7 --verify-time-samples 8 --out cli_ex.json") == 0);
  const std::string rep = slurp("cli_ex.json");
  CHECK(rep.find("\"verdict\": \"positive\"") != std::string::npos);
}

TEST_CASE("config file supplies defaults, flags take precedence") {
  {
    std::ofstream cfg("cli_cfg.ini");
    cfg << "grid=5\nbox=1\n";
  }
  CHECK(run("--config cli_cfg.ini factorize --builtin reeb:0.2 --eps 0.5 --out cli_cf.json") == 0);
  const std::string rep = slurp("cli_cf.json");
  CHECK(rep.find("\"n\": 5") != std::string::npos);
  CHECK(run("--config cli_cfg.ini --grid 3 factorize --builtin reeb:0.2 --eps 0.5 "
            "--out cli_cf2.json") == 0);
  CHECK(slurp("cli_cf2.json").find("\"n\": 3") != std::string::npos);
}
