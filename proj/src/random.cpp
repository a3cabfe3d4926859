#include "ksmooth/random.hpp"

#include <algorithm>
#include <cmath>

namespace ksmooth {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream_name) {
  return splitmix64(seed ^ fnv1a64(stream_name));
}

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

int Rng::uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

double Rng::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

cplx Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return cplx(re, im) / std::sqrt(2.0);
}

Vector Rng::complex_gaussian(Index n) {
  Vector v(n);
  for (Index j = 0; j < n; ++j) v(j) = complex_normal();
  return v;
}

Matrix Rng::complex_gaussian(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = complex_normal();
  return m;
}

Matrix random_unitary(Index n, Rng& rng) {
  const Matrix g = rng.complex_gaussian(n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

HermitianMatrix hermitian_with_spectrum(const RealVector& spectrum, Rng& rng) {
  const Matrix u = random_unitary(spectrum.size(), rng);
  Matrix h = u * spectrum.cast<cplx>().asDiagonal() * u.adjoint();
  h = 0.5 * (h + h.adjoint()).eval();
  return HermitianMatrix(std::move(h));
}

RandomInstance random_instance(const InstanceSpec& spec, Rng& rng) {
  RealVector shifted(spec.dim);
  for (Index j = 0; j < spec.dim; ++j)
    shifted(j) = j < spec.kernel_dim ? 0.0 : rng.uniform(spec.range_lo, spec.range_hi);
  const RealVector spectrum = shifted.array() - spec.nu;
  HermitianMatrix h = hermitian_with_spectrum(spectrum, rng);
  SpectralOperator s = decompose(h);
  FactorOperator a(rng.complex_gaussian(spec.rows, spec.dim) / std::sqrt(double(spec.dim)));
  return RandomInstance{std::move(h), std::move(s), std::move(a), spec.nu, spec.kernel_dim};
}

}  // namespace ksmooth
