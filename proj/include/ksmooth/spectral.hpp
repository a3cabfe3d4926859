#pragma once

// Finite-dimensional self-adjoint operators and their functional calculus.
//
// Every operator function in the library goes through the eigendecomposition
// held by SpectralOperator: powers, propagators and resolvents are evaluated
// entrywise on the eigenvalues and conjugated back with the eigenbasis.

#include "ksmooth/errors.hpp"
#include "ksmooth/linalg.hpp"

#include <variant>
#include <vector>

namespace ksmooth {

// Dense Hermitian matrix. Construction rejects inputs whose asymmetry,
// measured relative to the largest entry, exceeds the tolerance.
class HermitianMatrix {
 public:
  static constexpr double kDefaultTolerance = 1e-12;

  explicit HermitianMatrix(Matrix entries, double tolerance = kDefaultTolerance);

  Index dim() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }

  // max_jk |m_jk - conj(m_kj)| / max_jk |m_jk|  (0 for the zero matrix)
  static double relative_asymmetry(const Matrix& m);

 private:
  Matrix entries_;
};

// H = U diag(lambda) U*, with a recorded shift nu used by the functional
// calculus (functions are evaluated at lambda + nu).
class SpectralOperator {
 public:
  static constexpr double kDefaultKernelTolerance = 1e-9;

  SpectralOperator(RealVector eigenvalues, Matrix eigenbasis, double shift = 0.0,
                   double kernel_tolerance = kDefaultKernelTolerance);

  Index dim() const noexcept { return eigenvalues_.size(); }
  const RealVector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenbasis() const noexcept { return eigenbasis_; }
  double shift() const noexcept { return shift_; }
  double kernel_tolerance() const noexcept { return kernel_tolerance_; }

  RealVector shifted_eigenvalues() const;

  // Absolute "is zero" threshold for lambda + nu: kernel_tolerance * max|lambda + nu|.
  double kernel_threshold() const;
  double kernel_threshold(double nu) const;

  bool nonnegative_after_shift(double tol = 1e-10) const;

  SpectralOperator with_shift(double nu) const;
  // The operator H + nu with shift reset to zero.
  SpectralOperator absorbed_shift() const;

  // U diag(lambda) U*
  Matrix reconstruct() const;

 private:
  RealVector eigenvalues_;
  Matrix eigenbasis_;
  double shift_;
  double kernel_tolerance_;
};

// Closed operator A : H -> H1 as a dense rows x cols matrix.
class FactorOperator {
 public:
  explicit FactorOperator(Matrix entries);

  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }
  const Matrix& entries() const noexcept { return entries_; }
  Matrix adjoint() const { return entries_.adjoint(); }

  // Throws ValidationError unless cols() == s.dim().
  void check_compatible(const SpectralOperator& s) const;

  static FactorOperator identity(Index n) { return FactorOperator(Matrix::Identity(n, n)); }
  static FactorOperator zero(Index rows, Index cols) {
    return FactorOperator(Matrix::Zero(rows, cols));
  }

 private:
  Matrix entries_;
};

// Orthogonal projection onto ker(H + nu)^perp.
struct Projection {
  Matrix entries;
  Index rank = 0;
  // range_mask[j] is true when eigenvector j spans part of the range.
  std::vector<bool> range_mask;
};

// Scalar functions understood by the functional calculus. All are evaluated at
// the shifted eigenvalue lambda + nu.
namespace fn {
// x^exponent. Negative exponents act as 0 on the kernel; non-integer exponents
// reject negative arguments.
struct Power {
  double exponent;
};
// e^{-i t x}
struct Propagator {
  double t;
};
// e^{-i t sqrt(x)}; requires x >= 0.
struct HalfWavePropagator {
  double t;
};
// (x - z)^{-1}
struct Resolvent {
  cplx z;
};
}  // namespace fn

using ScalarFunction = std::variant<fn::Power, fn::Propagator, fn::HalfWavePropagator, fn::Resolvent>;

SpectralOperator decompose(const HermitianMatrix& h, double shift = 0.0);

// f(lambda_j + nu) for every eigenvalue, applying the kernel and domain rules.
Vector spectral_values(const SpectralOperator& s, const ScalarFunction& f);

Vector apply_function(const SpectralOperator& s, const ScalarFunction& f, const Vector& v);
Matrix function_matrix(const SpectralOperator& s, const ScalarFunction& f);

// (H - z)^{-1} v of the unshifted H.
Vector resolvent_apply(const SpectralOperator& s, cplx z, const Vector& v);
Matrix resolvent_matrix(const SpectralOperator& s, cplx z);

Projection kernel_projection(const SpectralOperator& s, double nu);

// Distance below which a spectral parameter is treated as on the spectrum.
inline constexpr double kSpectrumGuard = 1e-13;

// Diagnostics for the SpectralOperator invariants against its source matrix.
struct DecompositionResiduals {
  double unitarity;       // ||U*U - I||_max
  double reconstruction;  // ||U diag U* - H||_max
};
DecompositionResiduals decomposition_residuals(const SpectralOperator& s, const HermitianMatrix& h);

}  // namespace ksmooth
