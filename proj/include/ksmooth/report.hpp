#pragma once

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ksmooth {

using json = nlohmann::ordered_json;

enum class Verdict { pass, fail, warn };
enum class EstimateKind { smooth, supersmooth };

const char* to_string(Verdict v);
const char* to_string(EstimateKind k);

struct GridPoint {
  double lambda = 0.0;
  double eps = 0.0;  // signed: negative for lower half-plane samples
};

struct SweepRow {
  double lambda;
  double eps;
  double value;
};

// Measured constant or residual table for one check, with its verdict against
// a named bound.
struct EstimateReport {
  std::string name;
  double constant = 0.0;
  GridPoint argmax;
  std::optional<EstimateKind> kind;
  json grid = json::object();
  std::map<std::string, double> residuals;
  std::string bound_name;
  double bound_value = 0.0;
  Verdict verdict = Verdict::pass;
  std::vector<GridPoint> skipped;
  std::vector<SweepRow> sweep;
  std::vector<std::string> notes;
};

json to_json(const EstimateReport& r);

// Fixed-width decimal rendering shared by every CSV writer: 17 significant
// digits, locale independent.
std::string format_double(double x);

// Generic CSV table; sweeps and per-sample tables are converted to this before
// they are written so every CSV in a report directory shares one formatter.
struct CsvTable {
  std::string name;  // file stem, e.g. "transfer_sweep"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvTable sweep_table(const std::string& name, const EstimateReport& r);
void write_csv(std::ostream& os, const CsvTable& t);

}  // namespace ksmooth
