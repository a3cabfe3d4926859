#pragma once

// Seeded random instances. Each check draws from its own stream, derived from
// the run seed and the check name:
//
//   stream_seed = splitmix64(seed XOR fnv1a64(check_name))
//
// so checks can run in any order, or alone, and still see identical data.

#include "ksmooth/spectral.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace ksmooth {

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream_name);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::string_view stream) : engine_(stream_seed(seed, stream)) {}

  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive
  double normal();
  cplx complex_normal();  // E|z|^2 = 1
  Vector complex_gaussian(Index n);
  Matrix complex_gaussian(Index rows, Index cols);

 private:
  std::mt19937_64 engine_;
};

// Haar-like unitary from the QR factorization of a complex Gaussian matrix.
Matrix random_unitary(Index n, Rng& rng);

// Hermitian matrix with prescribed spectrum in a random basis.
HermitianMatrix hermitian_with_spectrum(const RealVector& spectrum, Rng& rng);

struct InstanceSpec {
  Index dim = 8;
  Index rows = 8;
  int kernel_dim = 0;       // exact zero eigenvalues of H + nu
  double nu = 0.0;          // H is shifted down by nu so that H + nu >= 0
  double range_lo = 0.25;   // nonzero eigenvalues of H + nu drawn from [lo, hi]
  double range_hi = 4.0;
};

struct RandomInstance {
  HermitianMatrix h;
  SpectralOperator s;
  FactorOperator a;
  double nu;
  int kernel_dim;
};

RandomInstance random_instance(const InstanceSpec& spec, Rng& rng);

}  // namespace ksmooth
