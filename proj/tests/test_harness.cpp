#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ksmooth/harness.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

using namespace ksmooth;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ksmooth-test-harness-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

// Runs the verify tool with output silenced; returns its exit status.
int verify(const std::string& args) {
  const std::string cmd = std::string("\"") + VERIFY_EXE + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("sha256 of a known string") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("tolerances") {
  Tolerances t;
  CHECK(t.get("transfer.slack") > 0.0);
  t.set("transfer.slack", 0.2);
  CHECK(t.get("transfer.slack") == 0.2);
  CHECK_THROWS_AS(t.get("transfer.typo"), ConfigError);
  CHECK_THROWS_AS(t.set("transfer.typo", 1.0), ConfigError);
  CHECK_THROWS_AS(t.set("transfer.slack", -1.0), ConfigError);
}

TEST_CASE("warnings do not fail a suite") {
  EstimateReport a, b;
  a.verdict = Verdict::pass;
  b.verdict = Verdict::warn;
  CHECK(overall_verdict({a, b}) == Verdict::pass);
  b.verdict = Verdict::fail;
  CHECK(overall_verdict({a, b}) == Verdict::fail);
}

TEST_CASE("suite names") {
  CHECK(is_suite("all"));
  CHECK(is_suite("kernel-integrals"));
  CHECK_FALSE(is_suite("everything"));
  CHECK(suite_names().size() == 6);
}

TEST_CASE("run is deterministic and orders checks by name") {
  RunConfig rc;
  rc.suite = "identities";
  rc.seed = 9;
  const SuiteReport a = run(rc);
  const SuiteReport b = run(rc);
  REQUIRE(!a.checks.empty());
  for (std::size_t k = 1; k < a.checks.size(); ++k) CHECK(a.checks[k - 1].name <= a.checks[k].name);
  CHECK(report_json(a).dump() == report_json(b).dump());
  CHECK(a.overall == Verdict::pass);

  RunConfig bad = rc;
  bad.tolerance_overrides["no.such"] = 1.0;
  CHECK_THROWS_AS(run(bad), ConfigError);
  RunConfig missing = rc;
  missing.model_config = "/nonexistent/model.ini";
  CHECK_THROWS_AS(run(missing), IoError);
}

TEST_CASE("verify exit codes") {
  const fs::path out = scratch("codes");
  CHECK(verify("identities --out " + out.string()) == 0);
  CHECK(verify("identities --out " + out.string() + " --tol identities.exact=0") == 1);
  CHECK(verify("everything --out " + out.string()) == 2);
  CHECK(verify("identities --out " + out.string() + " --tol nope=1") == 2);
  CHECK(verify("identities --out " + out.string() + " --tol identities.exact") == 2);
  CHECK(verify("identities --out " + out.string() + " --tol identities.exact=abc") == 2);
  CHECK(verify("identities --out " + out.string() + " --seed abc") == 2);
  CHECK(verify("identities --out " + out.string() + " --config /nonexistent/model.ini") == 2);
  CHECK(verify("") == 2);
}

TEST_CASE("verify writes a report, CSV tables and a checksummed manifest") {
  const fs::path out = scratch("kernel");
  REQUIRE(verify("kernel-integrals --config \"" + std::string(CONFIG_DIR) + "/small.ini\" --out " + out.string()) == 0);
  const std::string csv = slurp(out / "kernel_sweep.csv");
  CHECK(csv.rfind("sign,theta,value,error_estimate,evaluations\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 2 * 199);

  const json report = json::parse(slurp(out / "report.json"));
  CHECK(report["suite"] == "kernel-integrals");
  CHECK(report["verdict"] == "pass");
  CHECK(report["seed"] == 42);
  CHECK(report["config"]["grid"]["N"] == 8);
  CHECK(!report.contains("created"));

  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest.contains("created"));
  REQUIRE(manifest["files"].size() == 2);
  for (const auto& f : manifest["files"]) {
    const std::string bytes = slurp(out / f["file"].get<std::string>());
    CHECK(f["bytes"].get<std::uintmax_t>() == bytes.size());
    CHECK(f["sha256"].get<std::string>() == sha256_hex(bytes));
  }
}

TEST_CASE("verify honours VERIFY_OUT_DIR when --out is absent") {
  const fs::path out = scratch("env");
  ::setenv("VERIFY_OUT_DIR", out.string().c_str(), 1);
  CHECK(verify("identities") == 0);
  ::unsetenv("VERIFY_OUT_DIR");
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "manifest.json"));
}
