#include "ksmooth/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace ksmooth {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::warn: return "warn";
  }
  return "?";
}

const char* to_string(EstimateKind k) {
  return k == EstimateKind::smooth ? "smooth" : "supersmooth";
}

namespace {

// JSON has no inf/nan; those become strings so the document stays valid.
json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const EstimateReport& r) {
  json j;
  j["name"] = r.name;
  j["constant"] = number(r.constant);
  j["argmax"] = {{"lambda", number(r.argmax.lambda)}, {"eps", number(r.argmax.eps)}};
  j["kind"] = r.kind ? json(to_string(*r.kind)) : json(nullptr);
  j["bound_name"] = r.bound_name;
  j["bound_value"] = number(r.bound_value);
  j["verdict"] = to_string(r.verdict);
  json res = json::object();
  for (const auto& [k, v] : r.residuals) res[k] = number(v);
  j["residuals"] = std::move(res);
  j["grid"] = r.grid;
  json skipped = json::array();
  for (const auto& p : r.skipped) skipped.push_back({{"lambda", p.lambda}, {"eps", p.eps}});
  j["skipped"] = std::move(skipped);
  j["notes"] = r.notes;
  return j;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable sweep_table(const std::string& name, const EstimateReport& r) {
  CsvTable t{name, {"lambda", "eps", "value"}, {}};
  t.rows.reserve(r.sweep.size());
  for (const auto& row : r.sweep)
    t.rows.push_back({format_double(row.lambda), format_double(row.eps), format_double(row.value)});
  return t;
}

void write_csv(std::ostream& os, const CsvTable& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << "\n";
  }
}

}  // namespace ksmooth
