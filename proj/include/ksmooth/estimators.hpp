#pragma once

// Smoothness and supersmoothness constants measured on grids of spectral
// parameters z = lambda + i eps, the exact finite-dimensional identities behind
// the square-root transfer bound, and the transfer check C <= (pi + 3) a.
//
// Finite matrices have pure point spectrum, so sup over eps -> 0 diverges at
// eigenvalues. Every constant here is measured relative to an explicit
// eps-floor (the smallest eps sample of its grid).

#include "ksmooth/report.hpp"
#include "ksmooth/spectral.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace ksmooth {

struct ZGrid {
  std::vector<double> lambdas;    // any order; reports follow this order
  std::vector<double> epsilons;   // > 0, strictly descending; back() is the floor
  bool include_conjugates = false;

  double floor() const { return epsilons.back(); }
  double eps_max() const { return epsilons.front(); }
  double lambda_lo() const;
  double lambda_hi() const;
  std::size_t size() const {
    return lambdas.size() * epsilons.size() * (include_conjugates ? 2 : 1);
  }

  void validate() const;  // throws ConfigError
  json descriptor() const;

  // lambda samples: n_lambda uniform points on [min(spec) - margin, max(spec) + margin]
  // merged with every eigenvalue, sorted ascending.
  static ZGrid covering(const RealVector& spectrum, double margin, int n_lambda,
                        std::vector<double> epsilons, bool include_conjugates = false);
};

// `count` values from hi down to lo, geometrically spaced.
std::vector<double> geometric_ladder(double hi, double lo, int count);

enum class SandwichKind { full, imaginary };

inline SandwichKind sandwich_kind(EstimateKind k) {
  return k == EstimateKind::supersmooth ? SandwichKind::full : SandwichKind::imaginary;
}

// Evaluates B diag(g(omega_j, z)) B* for g = (omega - z)^{-1} or its imaginary
// part. For a factor A and operator H = U diag(omega) U*, B = A U.
class SandwichEvaluator {
 public:
  SandwichEvaluator(const FactorOperator& a, const SpectralOperator& s);
  SandwichEvaluator(Matrix weighted_factor, RealVector frequencies);

  Matrix sandwich(cplx z, SandwichKind kind) const;
  double norm(cplx z, SandwichKind kind) const;
  double distance_to_spectrum(cplx z) const;
  Index rows() const { return factor_.rows(); }

 private:
  Matrix factor_;
  RealVector frequencies_;
};

// ||A R(z) A*|| (full) or ||A Im R(z) A*|| (imaginary), Im R = (R(z) - R(conj z)) / 2i.
double sandwich_norm(const FactorOperator& a, const SpectralOperator& s, cplx z, SandwichKind kind);

// Max of sandwich_norm over the grid. Grid points within kSpectrumGuard of the
// spectrum are skipped and listed in the report.
EstimateReport smoothness_constant(const FactorOperator& a, const SpectralOperator& s,
                                   const ZGrid& grid, EstimateKind kind, bool record_sweep = false);

// The factor A (H+nu)^{-1/4} P paired with sqrt(H+nu).
struct HalfWaveModel {
  FactorOperator factor;
  SpectralOperator root;
  Projection projection;
};
HalfWaveModel half_wave_model(const FactorOperator& a, const SpectralOperator& s, double nu);

// || A Q^{-1/4}P (sqrt(Q) - z)^{-1} Q^{-1/4}P A*  -  A P (I + z Q^{-1/2}P) R_Q(z^2) P A* ||
// with Q = H + nu. Both sides are computed through different routes (spectral
// calculus versus LU solves against the reconstructed matrix).
double factorization_residual(const FactorOperator& a, const SpectralOperator& s, double nu, cplx z);

// || R(z1) - R(z2) - (z1 - z2) R(z1) R(z2) || for the unshifted H.
double resolvent_identity_residual(const SpectralOperator& s, cplx z1, cplx z2);

// The specialisation used by the transfer argument, on Q = H + nu:
// || R(z^2) - R(-|z|^2) - (z^2 + |z|^2) R(z^2) R(-|z|^2) ||.
double shifted_resolvent_identity_residual(const SpectralOperator& s, double nu, cplx z);

enum class KernelSign { plus, minus };

struct QOperatorResult {
  Matrix q;                // direct matrix route
  Matrix stone;            // sum over eigenprojections
  double stone_residual;   // ||q - stone||
};

// Q_pm(z) = A [ z Q^{-1/2} pm (z^2 + |z|^2) R(-|z|^2) ] R(z^2) A* with
// Q = H + s.shift(). With a projection the factor A is replaced by A P;
// without one, a kernel in Q is a DomainError.
QOperatorResult q_operator(const FactorOperator& a, const SpectralOperator& s, cplx z,
                           KernelSign sign, const Projection* projection = nullptr);

enum class QuadratureScheme { tanh_sinh, adaptive_simpson };

struct KernelQuadratureSpec {
  // Upper integration limit in mu. Infinite by default: the integral is taken
  // in the variable phi = atan(sqrt(mu)), which maps (0, inf) onto (0, pi/2).
  double mu_cutoff = std::numeric_limits<double>::infinity();
  int max_evaluations = 20000;
  QuadratureScheme scheme = QuadratureScheme::tanh_sinh;
  double tolerance = 1e-13;

  // Analytic bound on the dropped tail, 2 / sqrt(mu_cutoff).
  double tail_bound() const;
  void validate() const;  // tail_bound() <= 1e-8
};

struct KernelIntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double tail_bound = 0.0;
  int evaluations = 0;
  bool converged = false;
  // The pi bound is claimed for I_- on (0, pi/2] and for I_+ on (pi/2, pi).
  bool bound_applies = false;
  bool within_bound = false;
};

// I_pm(theta) = int_0^inf |mu - e^{2 i theta}|^{-1} | e^{i theta}/sqrt(mu) pm (e^{2 i theta} + 1)/(mu + 1) | dmu
KernelIntegralResult kernel_integral(double theta, KernelSign sign,
                                     const KernelQuadratureSpec& spec = {},
                                     double bound_slack = 1e-6);

// Residuals of the two complex-modulus identities used to simplify I_pm:
//   | |e^{i th}(mu+1) - sqrt(mu)(e^{2i th}+1)| - |sqrt(mu) - e^{i th}|^2 |
//   | |(mu+1) e^{i th} + sqrt(mu)(e^{2i th}+1)| - |sqrt(mu) + e^{i th}|^2 |
std::pair<double, double> modulus_identity_check(double mu, double theta);

// Builds a Schrodinger-side grid (in coordinates of H + nu) that covers
// {z^2, -|z|^2 : z in half_wave_grid}: its floor is the smallest distance of
// those targets to the spectrum.
ZGrid schrodinger_grid_for(const ZGrid& half_wave_grid, const SpectralOperator& s, double nu,
                           int n_lambda = 400, int n_eps = 12);

// Targets not covered by the grid. A target w is covered when Re w lies in the
// lambda hull, |Im w| <= eps_max and dist(w, spec(H + nu)) >= floor.
std::vector<cplx> uncovered_targets(const ZGrid& half_wave_grid, const ZGrid& schrodinger_grid,
                                    const SpectralOperator& s, double nu);

// C = sup over half_wave_grid of the (super)smoothing sandwich of A (H+nu)^{-1/4} P
// for sqrt(H + nu); a = the matching constant of A for H + nu over
// schrodinger_grid. Passes iff C <= (pi + 3) a (1 + tolerance).
EstimateReport transfer_check(const FactorOperator& a, const SpectralOperator& s, double nu,
                              const ZGrid& half_wave_grid, const ZGrid& schrodinger_grid,
                              EstimateKind kind = EstimateKind::supersmooth,
                              double tolerance = 0.05, bool record_sweep = false);

}  // namespace ksmooth
