// verify <suite> [--config FILE] [--seed N] [--out DIR] [--tol name=value]... [--trace]
//
// Exit status: 0 all checks pass (warnings allowed), 1 some check failed,
// 2 usage, configuration or I/O error.

#include "ksmooth/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::pair<std::string, double> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ksmooth::ConfigError("--tol expects name=value, got '" + text + "'");
  const std::string name = text.substr(0, eq);
  const std::string value = text.substr(eq + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw ksmooth::ConfigError("--tol " + name + ": not a number: '" + value + "'");
  return {name, v};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of smoothing, transfer and Strichartz-type estimates"};
  std::string suite;
  std::string config;
  std::uint64_t seed = 42;
  std::string out;
  std::vector<std::string> tols;
  bool trace = false;

  std::string suites;
  for (const std::string& s : ksmooth::suite_names()) suites += s + ", ";
  app.add_option("suite", suite, "suite to run: " + suites + "all")->required();
  app.add_option("--config", config, "model INI file");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out, "output directory (default $VERIFY_OUT_DIR, then ./verify-out)");
  app.add_option("--tol", tols, "tolerance override name=value (repeatable)");
  app.add_flag("--trace", trace, "also write per-sample traces");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ksmooth::RunConfig rc;
    rc.suite = suite;
    rc.seed = seed;
    rc.traces = trace;
    if (!config.empty()) rc.model_config = config;
    for (const std::string& t : tols) rc.tolerance_overrides.insert(parse_override(t));
    if (!out.empty())
      rc.out_dir = out;
    else if (const char* env = std::getenv("VERIFY_OUT_DIR"); env && *env)
      rc.out_dir = env;
    if (!ksmooth::is_suite(rc.suite)) throw ksmooth::ConfigError("unknown suite '" + rc.suite + "'; expected " + suites + "all");

    const ksmooth::SuiteReport r = ksmooth::run(rc);
    ksmooth::emit_report(r, rc.out_dir);
    for (const ksmooth::EstimateReport& c : r.checks)
      std::cout << ksmooth::to_string(c.verdict) << "  " << c.name << "  " << ksmooth::format_double(c.constant)
                << " vs " << c.bound_name << " = " << ksmooth::format_double(c.bound_value) << "\n";
    std::cout << "overall: " << ksmooth::to_string(r.overall) << " (" << r.checks.size() << " checks, report in "
              << rc.out_dir.string() << ")\n";
    return r.overall == ksmooth::Verdict::fail ? 1 : 0;
  } catch (const ksmooth::ConfigError& e) {
    std::cerr << "verify: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ksmooth::IoError& e) {
    std::cerr << "verify: i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return 1;
  }
}
