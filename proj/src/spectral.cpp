#include "ksmooth/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ksmooth {

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

double HermitianMatrix::relative_asymmetry(const Matrix& m) {
  const double scale = max_abs(m);
  if (scale == 0.0) return 0.0;
  return max_abs(m - m.adjoint()) / scale;
}

HermitianMatrix::HermitianMatrix(Matrix entries, double tolerance) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    std::ostringstream os;
    os << "HermitianMatrix: expected a non-empty square matrix, got " << entries_.rows() << "x"
       << entries_.cols();
    throw ValidationError(os.str());
  }
  if (!entries_.allFinite()) throw ValidationError("HermitianMatrix: non-finite entry");
  const double asym = relative_asymmetry(entries_);
  if (asym > tolerance) {
    std::ostringstream os;
    os << "HermitianMatrix: input is not Hermitian, max relative asymmetry " << asym;
    throw ValidationError(os.str());
  }
}

// ---------------------------------------------------------------------------

SpectralOperator::SpectralOperator(RealVector eigenvalues, Matrix eigenbasis, double shift,
                                   double kernel_tolerance)
    : eigenvalues_(std::move(eigenvalues)),
      eigenbasis_(std::move(eigenbasis)),
      shift_(shift),
      kernel_tolerance_(kernel_tolerance) {
  if (eigenbasis_.rows() != eigenvalues_.size() || eigenbasis_.cols() != eigenvalues_.size())
    throw ValidationError("SpectralOperator: eigenbasis shape does not match eigenvalue count");
  for (Index j = 1; j < eigenvalues_.size(); ++j)
    if (eigenvalues_(j) < eigenvalues_(j - 1))
      throw ValidationError("SpectralOperator: eigenvalues must be nondecreasing");
}

RealVector SpectralOperator::shifted_eigenvalues() const {
  return eigenvalues_.array() + shift_;
}

double SpectralOperator::kernel_threshold(double nu) const {
  const double scale = (eigenvalues_.array() + nu).abs().maxCoeff();
  return kernel_tolerance_ * (scale > 0.0 ? scale : 1.0);
}

double SpectralOperator::kernel_threshold() const { return kernel_threshold(shift_); }

bool SpectralOperator::nonnegative_after_shift(double tol) const {
  return eigenvalues_.minCoeff() + shift_ >= -tol;
}

SpectralOperator SpectralOperator::with_shift(double nu) const {
  return SpectralOperator(eigenvalues_, eigenbasis_, nu, kernel_tolerance_);
}

SpectralOperator SpectralOperator::absorbed_shift() const {
  return SpectralOperator(shifted_eigenvalues(), eigenbasis_, 0.0, kernel_tolerance_);
}

Matrix SpectralOperator::reconstruct() const {
  return eigenbasis_ * eigenvalues_.cast<cplx>().asDiagonal() * eigenbasis_.adjoint();
}

// ---------------------------------------------------------------------------

FactorOperator::FactorOperator(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.cols() == 0)
    throw ValidationError("FactorOperator: empty matrix");
  if (!entries_.allFinite()) throw ValidationError("FactorOperator: non-finite entry");
}

void FactorOperator::check_compatible(const SpectralOperator& s) const {
  if (cols() != s.dim()) {
    std::ostringstream os;
    os << "FactorOperator: " << rows() << "x" << cols() << " factor cannot act on a space of dim "
       << s.dim();
    throw ValidationError(os.str());
  }
}

// ---------------------------------------------------------------------------

SpectralOperator decompose(const HermitianMatrix& h, double shift) {
  const Index n = h.dim();
  // zheevr (MRRR). The divide-and-conquer driver zheevd of the reference
  // LAPACK shipped here returns non-orthonormal eigenvectors on operators with
  // heavily degenerate spectra, such as lattice Schrodinger operators.
  Matrix entries = h.entries();
  Matrix work(n, n);
  RealVector w(n);
  std::vector<lapack_int> support(static_cast<std::size_t>(2 * std::max<Index>(n, 1)));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'V', 'A', 'L', static_cast<lapack_int>(n),
      reinterpret_cast<lapack_complex_double*>(entries.data()), static_cast<lapack_int>(n), 0.0, 0.0, 0, 0,
      0.0, &found, w.data(), reinterpret_cast<lapack_complex_double*>(work.data()),
      static_cast<lapack_int>(n), support.data());
  if (info < 0) throw Error("decompose: invalid argument to zheevr");
  if (info > 0 || found != static_cast<lapack_int>(n)) {
    std::ostringstream os;
    os << "decompose: eigensolver failed to converge (" << info << " unconverged)";
    throw ConvergenceError(os.str(), static_cast<int>(info));
  }

  // LAPACK already returns ascending order; the stable sort pins the tie rule.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return w(a) < w(b); });

  RealVector values(n);
  Matrix basis(n, n);
  for (Index j = 0; j < n; ++j) {
    values(j) = w(order[static_cast<std::size_t>(j)]);
    basis.col(j) = work.col(order[static_cast<std::size_t>(j)]);
  }
  return SpectralOperator(std::move(values), std::move(basis), shift);
}

namespace {

struct Evaluator {
  double threshold;

  cplx operator()(const fn::Power& p, double x) const {
    if (std::abs(x) <= threshold) {
      if (p.exponent > 0.0) return 0.0;
      if (p.exponent == 0.0) return 1.0;
      return 0.0;  // inverse powers act as zero on the kernel
    }
    const bool integral = std::floor(p.exponent) == p.exponent;
    if (x < 0.0 && !integral) {
      std::ostringstream os;
      os << "fractional power " << p.exponent << " of negative eigenvalue " << x;
      throw DomainError(os.str(), x);
    }
    return std::pow(x, p.exponent);
  }
  cplx operator()(const fn::Propagator& p, double x) const { return std::exp(-kI * p.t * x); }
  cplx operator()(const fn::HalfWavePropagator& p, double x) const {
    if (x < -threshold) {
      std::ostringstream os;
      os << "half-wave propagator needs a nonnegative operator, found eigenvalue " << x;
      throw DomainError(os.str(), x);
    }
    return std::exp(-kI * p.t * std::sqrt(std::max(x, 0.0)));
  }
  cplx operator()(const fn::Resolvent& r, double x) const {
    const cplx d = x - r.z;
    if (std::abs(d) < kSpectrumGuard) {
      std::ostringstream os;
      os << "resolvent parameter " << r.z << " lies on the spectrum (eigenvalue " << x << ")";
      throw SingularityError(os.str(), x);
    }
    return 1.0 / d;
  }
};

}  // namespace

Vector spectral_values(const SpectralOperator& s, const ScalarFunction& f) {
  const RealVector x = s.shifted_eigenvalues();
  Evaluator ev{s.kernel_threshold()};
  Vector out(x.size());
  for (Index j = 0; j < x.size(); ++j)
    out(j) = std::visit([&](const auto& g) { return ev(g, x(j)); }, f);
  return out;
}

Vector apply_function(const SpectralOperator& s, const ScalarFunction& f, const Vector& v) {
  if (v.size() != s.dim()) throw ValidationError("apply_function: vector has wrong dimension");
  const Vector d = spectral_values(s, f);
  const Matrix& u = s.eigenbasis();
  return u * (d.cwiseProduct(u.adjoint() * v));
}

Matrix function_matrix(const SpectralOperator& s, const ScalarFunction& f) {
  const Vector d = spectral_values(s, f);
  const Matrix& u = s.eigenbasis();
  return u * d.asDiagonal() * u.adjoint();
}

namespace {

Vector resolvent_diagonal(const SpectralOperator& s, cplx z) {
  const RealVector& lam = s.eigenvalues();
  Vector d(lam.size());
  Index nearest = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < lam.size(); ++j) {
    const double dj = std::abs(lam(j) - z);
    if (dj < dist) {
      dist = dj;
      nearest = j;
    }
    d(j) = 1.0 / (lam(j) - z);
  }
  if (dist < kSpectrumGuard) {
    std::ostringstream os;
    os << "resolvent: z = " << z << " is within " << kSpectrumGuard << " of eigenvalue "
       << lam(nearest);
    throw SingularityError(os.str(), lam(nearest));
  }
  return d;
}

}  // namespace

Vector resolvent_apply(const SpectralOperator& s, cplx z, const Vector& v) {
  if (v.size() != s.dim()) throw ValidationError("resolvent_apply: vector has wrong dimension");
  const Vector d = resolvent_diagonal(s, z);
  const Matrix& u = s.eigenbasis();
  return u * (d.cwiseProduct(u.adjoint() * v));
}

Matrix resolvent_matrix(const SpectralOperator& s, cplx z) {
  const Vector d = resolvent_diagonal(s, z);
  const Matrix& u = s.eigenbasis();
  return u * d.asDiagonal() * u.adjoint();
}

Projection kernel_projection(const SpectralOperator& s, double nu) {
  const double thr = s.kernel_threshold(nu);
  const RealVector x = s.eigenvalues().array() + nu;
  if (x.minCoeff() < -thr) {
    std::ostringstream os;
    os << "kernel_projection: H + nu is not nonnegative (min eigenvalue " << x.minCoeff() << ")";
    throw DomainError(os.str(), x.minCoeff());
  }
  Projection p;
  p.range_mask.resize(static_cast<std::size_t>(x.size()));
  RealVector mask(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const bool in_range = x(j) > thr;
    p.range_mask[static_cast<std::size_t>(j)] = in_range;
    mask(j) = in_range ? 1.0 : 0.0;
    p.rank += in_range ? 1 : 0;
  }
  const Matrix& u = s.eigenbasis();
  p.entries = u * mask.cast<cplx>().asDiagonal() * u.adjoint();
  return p;
}

DecompositionResiduals decomposition_residuals(const SpectralOperator& s, const HermitianMatrix& h) {
  const Matrix& u = s.eigenbasis();
  const Index n = s.dim();
  DecompositionResiduals r{};
  r.unitarity = max_abs(u.adjoint() * u - Matrix::Identity(n, n));
  r.reconstruction = max_abs(s.reconstruct() - h.entries());
  return r;
}

}  // namespace ksmooth
