#include "ksmooth/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace ksmooth {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"grid", {"n", "N", "L", "boundary", "cap"}},
      {"weight", {"kind", "exponent", "r0"}},
      {"fields", {"A", "V", "C", "eps0", "check_decay", "sobolev_assumed", "resonance_free_assumed"}},
  };
  return s;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string source) : tree_(tree), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& why) const {
    throw ConfigError(source_ + ": [" + section + "] " + key + ": " + why);
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  std::optional<long long> integer(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    std::size_t used = 0;
    long long out = 0;
    try {
      out = std::stoll(*v, &used);
    } catch (const std::exception&) {
      fail(section, key, "expected an integer, got '" + *v + "'");
    }
    if (used != v->size()) fail(section, key, "expected an integer, got '" + *v + "'");
    return out;
  }

  std::optional<double> real(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    std::size_t used = 0;
    double out = 0.0;
    try {
      out = std::stod(*v, &used);
    } catch (const std::exception&) {
      fail(section, key, "expected a number, got '" + *v + "'");
    }
    if (used != v->size() || !std::isfinite(out))
      fail(section, key, "expected a finite number, got '" + *v + "'");
    return out;
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(section, key, "expected true or false, got '" + *v + "'");
  }

  template <class E>
  std::optional<E> choice(const std::string& section, const std::string& key,
                          const std::vector<std::pair<std::string, E>>& options) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    for (const auto& [name, value] : options)
      if (*v == name) return value;
    std::string names;
    for (const auto& o : options) names += (names.empty() ? "" : "|") + o.first;
    fail(section, key, "expected one of " + names + ", got '" + *v + "'");
  }

 private:
  const pt::ptree& tree_;
  std::string source_;
};

}  // namespace

ModelConfig parse_model_config(std::istream& in, const std::string& source_name) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream os;
    os << source_name << ":" << e.line() << ": " << e.message();
    throw ConfigError(os.str());
  }

  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (body.empty()) throw ConfigError(source_name + ": key '" + section + "' outside any section");
      throw ConfigError(source_name + ": unknown section [" + section + "]");
    }
    for (const auto& kv : body)
      if (!it->second.count(kv.first))
        throw ConfigError(source_name + ": [" + section + "] unknown key '" + kv.first + "'");
  }

  const Reader r(tree, source_name);
  ModelConfig c;
  c.source = source_name;

  if (auto v = r.integer("grid", "n")) c.grid.n = static_cast<int>(*v);
  if (auto v = r.integer("grid", "N")) c.grid.N = static_cast<int>(*v);
  if (auto v = r.real("grid", "L")) c.grid.L = *v;
  if (auto v = r.integer("grid", "cap")) c.grid.cap = static_cast<Index>(*v);
  if (auto v = r.choice<Boundary>("grid", "boundary",
                                  {{"periodic", Boundary::periodic}, {"dirichlet", Boundary::dirichlet}}))
    c.grid.boundary = *v;
  try {
    c.grid.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": [grid] " + e.what());
  }

  if (auto v = r.choice<WeightKind>("weight", "kind",
                                    {{"homogeneous", WeightKind::homogeneous}, {"japanese", WeightKind::japanese}}))
    c.weight.kind = *v;
  if (auto v = r.real("weight", "exponent")) c.weight.exponent = *v;
  if (auto v = r.real("weight", "r0")) c.weight.r0 = *v;
  try {
    (void)weight_values(c.grid, c.weight);
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": [weight] " + e.what());
  }

  if (auto v = r.raw("fields", "A")) c.a_profile = *v;
  if (auto v = r.raw("fields", "V")) c.v_profile = *v;
  if (auto v = r.real("fields", "C")) c.decay.C = *v;
  if (auto v = r.real("fields", "eps0")) c.decay.eps0 = *v;
  if (auto v = r.boolean("fields", "check_decay")) c.decay.check = *v;
  if (auto v = r.boolean("fields", "sobolev_assumed")) c.sobolev_assumed = *v;
  if (auto v = r.boolean("fields", "resonance_free_assumed")) c.resonance_free_assumed = *v;
  if (!(c.decay.C > 0.0)) r.fail("fields", "C", "must be > 0");
  if (!(c.decay.eps0 > 0.0)) r.fail("fields", "eps0", "must be > 0");
  try {
    (void)sample_fields(c.grid, c.a_profile, c.v_profile, c.decay);
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": [fields] " + e.what());
  }
  return c;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model config " + path.string());
  return parse_model_config(in, path.string());
}

}  // namespace ksmooth
