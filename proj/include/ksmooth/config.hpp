#pragma once

// Model configuration files: INI with sections
//
//   [grid]    n, N, L, boundary (periodic|dirichlet), cap
//   [weight]  kind (homogeneous|japanese), exponent, r0
//   [fields]  A, V (catalog profiles), C, eps0, check_decay,
//             sobolev_assumed, resonance_free_assumed
//
// Unknown sections or keys are rejected so typos do not pass silently.

#include "ksmooth/models.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace ksmooth {

struct ModelConfig {
  GridModel grid;
  WeightSpec weight;
  std::string a_profile = "zero";
  std::string v_profile = "zero";
  DecaySpec decay;
  bool sobolev_assumed = false;
  bool resonance_free_assumed = false;
  std::string source = "<builtin>";
};

ModelConfig parse_model_config(std::istream& in, const std::string& source_name);
ModelConfig load_model_config(const std::filesystem::path& path);

}  // namespace ksmooth
