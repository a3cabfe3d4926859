#pragma once

// Verification suites and report emission behind the `verify` tool.
//
// Suites: identities, kernel-integrals, transfer, duhamel, models, strichartz,
// and all (every suite in that order). Random data for a check named `name`
// comes from Rng(seed, name), so a check sees the same data whether it runs
// alone or inside `all`.

#include "ksmooth/config.hpp"
#include "ksmooth/report.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ksmooth {

inline constexpr int kReportSchema = 1;

const std::vector<std::string>& suite_names();  // without "all"
bool is_suite(const std::string& name);         // includes "all"

// Named tolerances with defaults; overriding an unknown name is a ConfigError.
class Tolerances {
 public:
  Tolerances();
  double get(const std::string& name) const;
  void set(const std::string& name, double value);
  const std::map<std::string, double>& all() const noexcept { return values_; }

 private:
  std::map<std::string, double> values_;
};

struct RunConfig {
  std::string suite = "all";
  std::uint64_t seed = 42;
  std::map<std::string, double> tolerance_overrides;
  std::optional<std::filesystem::path> model_config;
  std::filesystem::path out_dir = "verify-out";
  bool traces = false;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<EstimateReport> checks;  // ordered by check name
  Verdict overall = Verdict::pass;
  double wall_seconds = 0.0;
  std::string version;
  json config_echo = json::object();
  std::vector<CsvTable> tables;
};

// pass unless some check failed; warnings do not fail a suite.
Verdict overall_verdict(const std::vector<EstimateReport>& checks);

// Runs the suite. Configuration problems surface as ConfigError or IoError
// before any check runs.
SuiteReport run(const RunConfig& config);

struct ManifestEntry {
  std::string file;
  std::uintmax_t bytes;
  std::string sha256;
};

// Writes report.json, one CSV per table and manifest.json (which alone holds
// timestamps and wall-clock time). Returns the manifest entries; the
// manifest does not list itself.
std::vector<ManifestEntry> emit_report(const SuiteReport& r, const std::filesystem::path& dir);

json report_json(const SuiteReport& r);
std::string sha256_hex(const std::string& bytes);

}  // namespace ksmooth
