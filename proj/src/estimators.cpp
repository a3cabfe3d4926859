#include "ksmooth/estimators.hpp"

#include "ksmooth/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ksmooth {

namespace {

constexpr double kPi = std::numbers::pi;

double min_distance(const RealVector& spectrum, cplx z) {
  double d = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < spectrum.size(); ++j) d = std::min(d, std::abs(spectrum(j) - z));
  return d;
}

Matrix lu_resolvent(const Matrix& m, cplx z) {
  const Index n = m.rows();
  Matrix shifted = m - z * Matrix::Identity(n, n);
  return shifted.partialPivLu().inverse();
}

void require_upper(cplx z, const char* who) {
  if (!(z.imag() > 0.0)) {
    std::ostringstream os;
    os << who << ": needs Im z > 0, got z = " << z;
    throw DomainError(os.str(), z.imag());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double ZGrid::lambda_lo() const { return *std::min_element(lambdas.begin(), lambdas.end()); }
double ZGrid::lambda_hi() const { return *std::max_element(lambdas.begin(), lambdas.end()); }

void ZGrid::validate() const {
  if (lambdas.empty()) throw ConfigError("ZGrid: no lambda samples");
  if (epsilons.empty()) throw ConfigError("ZGrid: no eps samples");
  for (double l : lambdas)
    if (!std::isfinite(l)) throw ConfigError("ZGrid: non-finite lambda sample");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0) || !std::isfinite(epsilons[k]))
      throw ConfigError("ZGrid: eps samples must be finite and > 0");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1]))
      throw ConfigError("ZGrid: eps samples must be strictly descending");
  }
}

json ZGrid::descriptor() const {
  json j;
  j["n_lambda"] = lambdas.size();
  j["lambda_lo"] = lambdas.empty() ? 0.0 : lambda_lo();
  j["lambda_hi"] = lambdas.empty() ? 0.0 : lambda_hi();
  j["epsilons"] = epsilons;
  j["eps_floor"] = epsilons.empty() ? 0.0 : floor();
  j["include_conjugates"] = include_conjugates;
  return j;
}

ZGrid ZGrid::covering(const RealVector& spectrum, double margin, int n_lambda,
                      std::vector<double> epsilons, bool include_conjugates) {
  if (spectrum.size() == 0) throw ConfigError("ZGrid::covering: empty spectrum");
  if (n_lambda < 2) throw ConfigError("ZGrid::covering: need at least two lambda samples");
  const double lo = spectrum.minCoeff() - margin;
  const double hi = spectrum.maxCoeff() + margin;
  ZGrid g;
  g.lambdas.reserve(static_cast<std::size_t>(n_lambda + spectrum.size()));
  for (int k = 0; k < n_lambda; ++k) g.lambdas.push_back(lo + (hi - lo) * k / (n_lambda - 1));
  for (Index j = 0; j < spectrum.size(); ++j) g.lambdas.push_back(spectrum(j));
  std::sort(g.lambdas.begin(), g.lambdas.end());
  g.lambdas.erase(std::unique(g.lambdas.begin(), g.lambdas.end()), g.lambdas.end());
  g.epsilons = std::move(epsilons);
  g.include_conjugates = include_conjugates;
  g.validate();
  return g;
}

std::vector<double> geometric_ladder(double hi, double lo, int count) {
  if (!(hi > 0.0) || !(lo > 0.0) || count < 1) throw ConfigError("geometric_ladder: bad arguments");
  if (count == 1 || hi == lo) return {hi};
  std::vector<double> out(static_cast<std::size_t>(count));
  const double r = std::log(lo / hi) / (count - 1);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = hi * std::exp(r * k);
  out.front() = hi;
  out.back() = lo;
  return out;
}

// ---------------------------------------------------------------------------

SandwichEvaluator::SandwichEvaluator(const FactorOperator& a, const SpectralOperator& s)
    : factor_((a.check_compatible(s), a.entries() * s.eigenbasis())),
      frequencies_(s.eigenvalues()) {}

SandwichEvaluator::SandwichEvaluator(Matrix weighted_factor, RealVector frequencies)
    : factor_(std::move(weighted_factor)), frequencies_(std::move(frequencies)) {
  if (factor_.cols() != frequencies_.size())
    throw ValidationError("SandwichEvaluator: factor columns do not match frequency count");
}

double SandwichEvaluator::distance_to_spectrum(cplx z) const {
  return min_distance(frequencies_, z);
}

Matrix SandwichEvaluator::sandwich(cplx z, SandwichKind kind) const {
  const Index n = frequencies_.size();
  Vector d(n);
  Index nearest = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < n; ++j) {
    const cplx r = 1.0 / (frequencies_(j) - z);
    const double dj = std::abs(frequencies_(j) - z);
    if (dj < dist) {
      dist = dj;
      nearest = j;
    }
    // Im R at a real frequency: (r - conj r) / 2i = Im r.
    d(j) = kind == SandwichKind::full ? r : cplx(r.imag(), 0.0);
  }
  if (dist < kSpectrumGuard) {
    std::ostringstream os;
    os << "sandwich: z = " << z << " lies on the spectrum";
    throw SingularityError(os.str(), frequencies_(nearest));
  }
  return (factor_ * d.asDiagonal()) * factor_.adjoint();
}

double SandwichEvaluator::norm(cplx z, SandwichKind kind) const {
  const Matrix m = sandwich(z, kind);
  if (kind == SandwichKind::imaginary) {
    // Hermitian: the spectral norm is the largest |eigenvalue|.
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return operator_norm(m);
}

double sandwich_norm(const FactorOperator& a, const SpectralOperator& s, cplx z, SandwichKind kind) {
  return SandwichEvaluator(a, s).norm(z, kind);
}

namespace {

EstimateReport sweep_constant(const SandwichEvaluator& ev, const ZGrid& grid, EstimateKind kind,
                              bool record_sweep, const std::string& name) {
  grid.validate();
  EstimateReport r;
  r.name = name;
  r.kind = kind;
  r.grid = grid.descriptor();
  r.argmax = {grid.lambdas.front(), grid.epsilons.front()};
  const SandwichKind sk = sandwich_kind(kind);
  bool have = false;
  for (double lam : grid.lambdas) {
    for (double eps : grid.epsilons) {
      for (int side = 0; side < (grid.include_conjugates ? 2 : 1); ++side) {
        const double e = side == 0 ? eps : -eps;
        const cplx z(lam, e);
        if (ev.distance_to_spectrum(z) < kSpectrumGuard) {
          r.skipped.push_back({lam, e});
          continue;
        }
        const double v = ev.norm(z, sk);
        if (record_sweep) r.sweep.push_back({lam, e, v});
        if (!have || v > r.constant) {
          r.constant = v;
          r.argmax = {lam, e};
          have = true;
        }
      }
    }
  }
  r.residuals["eps_floor"] = grid.floor();
  r.residuals["skipped_points"] = static_cast<double>(r.skipped.size());
  return r;
}

}  // namespace

EstimateReport smoothness_constant(const FactorOperator& a, const SpectralOperator& s,
                                   const ZGrid& grid, EstimateKind kind, bool record_sweep) {
  return sweep_constant(SandwichEvaluator(a, s), grid, kind, record_sweep,
                        std::string(to_string(kind)) + "_constant");
}

// ---------------------------------------------------------------------------

HalfWaveModel half_wave_model(const FactorOperator& a, const SpectralOperator& s, double nu) {
  a.check_compatible(s);
  Projection p = kernel_projection(s, nu);
  const RealVector x = s.eigenvalues().array() + nu;
  RealVector root(x.size());
  Vector weight(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const bool in_range = p.range_mask[static_cast<std::size_t>(j)];
    root(j) = in_range ? std::sqrt(x(j)) : 0.0;
    weight(j) = in_range ? std::pow(x(j), -0.25) : 0.0;
  }
  const Matrix& u = s.eigenbasis();
  Matrix factor = a.entries() * u * weight.asDiagonal() * u.adjoint();
  return HalfWaveModel{FactorOperator(std::move(factor)), SpectralOperator(std::move(root), u),
                       std::move(p)};
}

double factorization_residual(const FactorOperator& a, const SpectralOperator& s, double nu, cplx z) {
  a.check_compatible(s);
  require_upper(z, "factorization_residual");
  const SpectralOperator q(s.eigenvalues().array() + nu, s.eigenbasis(), 0.0, s.kernel_tolerance());
  const Projection p = kernel_projection(s, nu);
  const RealVector qv = q.eigenvalues();
  const double d = min_distance(qv, z * z);
  if (d < kSpectrumGuard) {
    std::ostringstream os;
    os << "factorization_residual: z^2 = " << z * z << " lies on the spectrum of H + nu";
    throw SingularityError(os.str(), qv(0));
  }
  const Index n = s.dim();
  const Matrix& am = a.entries();

  // Spectral side: Q^{-1/4} P and sqrt(Q) from the functional calculus, the
  // half-wave resolvent by an LU solve.
  const Matrix quarter = function_matrix(q, fn::Power{-0.25}) * p.entries;
  const Matrix root = function_matrix(q, fn::Power{0.5});
  const Matrix half_res = lu_resolvent(root, z);
  const Matrix lhs = am * quarter * half_res * quarter * am.adjoint();

  // Schrodinger side: R_Q(z^2) by LU against the reconstructed matrix.
  const Matrix qm = s.reconstruct() + nu * Matrix::Identity(n, n);
  const Matrix inv_half = function_matrix(q, fn::Power{-0.5}) * p.entries;
  const Matrix rz2 = lu_resolvent(qm, z * z);
  const Matrix ap = am * p.entries;
  const Matrix rhs = ap * (Matrix::Identity(n, n) + z * inv_half) * rz2 * ap.adjoint();
  return operator_norm(lhs - rhs);
}

double resolvent_identity_residual(const SpectralOperator& s, cplx z1, cplx z2) {
  const Matrix r1 = resolvent_matrix(s, z1);
  const Matrix r2 = resolvent_matrix(s, z2);
  return operator_norm(r1 - r2 - (z1 - z2) * r1 * r2);
}

double shifted_resolvent_identity_residual(const SpectralOperator& s, double nu, cplx z) {
  const SpectralOperator q(s.eigenvalues().array() + nu, s.eigenbasis(), 0.0, s.kernel_tolerance());
  const cplx w1 = z * z;
  const double w2 = -std::norm(z);
  const Matrix r1 = resolvent_matrix(q, w1);
  const Matrix r2 = resolvent_matrix(q, w2);
  return operator_norm(r1 - r2 - (w1 - w2) * r1 * r2);
}

// ---------------------------------------------------------------------------

QOperatorResult q_operator(const FactorOperator& a, const SpectralOperator& s, cplx z,
                           KernelSign sign, const Projection* projection) {
  a.check_compatible(s);
  require_upper(z, "q_operator");
  const RealVector x = s.shifted_eigenvalues();
  const double thr = s.kernel_threshold();
  const Index n = s.dim();
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  for (Index j = 0; j < n; ++j) {
    if (x(j) < -thr) {
      std::ostringstream os;
      os << "q_operator: H + nu has negative eigenvalue " << x(j);
      throw DomainError(os.str(), x(j));
    }
    if (x(j) <= thr) {
      if (!projection) {
        std::ostringstream os;
        os << "q_operator: eigenvalue " << x(j) << " of H + nu must be projected out first";
        throw DomainError(os.str(), x(j));
      }
      active[static_cast<std::size_t>(j)] = false;
    }
  }
  if (projection) {
    if (projection->entries.rows() != n || projection->range_mask.size() != active.size())
      throw ValidationError("q_operator: projection has the wrong dimension");
    for (std::size_t j = 0; j < active.size(); ++j) active[j] = active[j] && projection->range_mask[j];
  }

  const double sgn = sign == KernelSign::plus ? 1.0 : -1.0;
  const cplx z2 = z * z;
  const double az2 = std::norm(z);
  const Matrix ap = projection ? Matrix(a.entries() * projection->entries) : a.entries();

  // Matrix route.
  const SpectralOperator q = s.absorbed_shift();
  const Matrix qm = q.reconstruct();
  const Matrix inv_half = function_matrix(q, fn::Power{-0.5});
  const Matrix inner = z * inv_half + sgn * (z2 + az2) * lu_resolvent(qm, -az2);
  QOperatorResult out;
  out.q = ap * inner * lu_resolvent(qm, z2) * ap.adjoint();

  // Stone sum over eigenprojections.
  const Matrix b = a.entries() * s.eigenbasis();
  out.stone = Matrix::Zero(a.rows(), a.rows());
  for (Index j = 0; j < n; ++j) {
    if (!active[static_cast<std::size_t>(j)]) continue;
    const double l = x(j);
    const cplx k = (z / std::sqrt(l) + sgn * (z2 + az2) / (l + az2)) / (l - z2);
    out.stone += k * b.col(j) * b.col(j).adjoint();
  }
  out.stone_residual = operator_norm(out.q - out.stone);
  return out;
}

// ---------------------------------------------------------------------------

double KernelQuadratureSpec::tail_bound() const {
  if (std::isinf(mu_cutoff)) return 0.0;
  return 2.0 / std::sqrt(mu_cutoff);
}

void KernelQuadratureSpec::validate() const {
  if (!(mu_cutoff > 0.0)) throw ConfigError("KernelQuadratureSpec: mu cutoff must be > 0");
  if (max_evaluations < 16) throw ConfigError("KernelQuadratureSpec: too few evaluations");
  if (!(tolerance > 0.0)) throw ConfigError("KernelQuadratureSpec: tolerance must be > 0");
  if (tail_bound() > 1e-8) {
    std::ostringstream os;
    os << "KernelQuadratureSpec: tail bound " << tail_bound() << " exceeds 1e-8 (cutoff "
       << mu_cutoff << ")";
    throw ConfigError(os.str());
  }
}

KernelIntegralResult kernel_integral(double theta, KernelSign sign, const KernelQuadratureSpec& spec,
                                     double bound_slack) {
  if (!(theta > 0.0 && theta < kPi)) throw DomainError("kernel_integral: theta must lie in (0, pi)", theta);
  spec.validate();
  const cplx e1 = std::polar(1.0, theta);
  const cplx e2 = std::polar(1.0, 2.0 * theta);
  const double sgn = sign == KernelSign::plus ? 1.0 : -1.0;

  // mu = tan^2 phi, dmu = 2 tan(phi) (1 + tan^2 phi) dphi. The 1/sqrt(mu)
  // singularity cancels and the integrand tends to 2 as phi -> pi/2.
  auto h = [&](double phi) {
    const double t = std::tan(phi);
    const double mu = t * t;
    return 2.0 * (1.0 + mu) / std::abs(mu - e2) * std::abs(e1 + sgn * t * (e2 + 1.0) / (mu + 1.0));
  };

  const double phi_max = std::isinf(spec.mu_cutoff) ? kPi / 2 : std::atan(std::sqrt(spec.mu_cutoff));
  // |mu - e^{2i theta}| is smallest at mu = cos(2 theta); split there.
  std::vector<double> breaks{0.0};
  const double c2 = std::cos(2.0 * theta);
  if (c2 > 0.0) {
    const double star = std::atan(std::sqrt(c2));
    if (star > 0.0 && star < phi_max) breaks.push_back(star);
  }
  breaks.push_back(phi_max);

  KernelIntegralResult r;
  r.converged = true;
  const int budget = spec.max_evaluations / static_cast<int>(breaks.size() - 1);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const QuadratureResult q =
        spec.scheme == QuadratureScheme::tanh_sinh
            ? tanh_sinh(h, breaks[k], breaks[k + 1], spec.tolerance, budget)
            : adaptive_simpson(h, breaks[k], breaks[k + 1], spec.tolerance, budget);
    r.value += q.value;
    r.error_estimate += q.error_estimate;
    r.evaluations += q.evaluations;
    r.converged = r.converged && q.converged;
  }
  r.tail_bound = spec.tail_bound();
  r.bound_applies = sign == KernelSign::minus ? theta <= kPi / 2 : theta > kPi / 2;
  r.within_bound = r.value + r.tail_bound <= kPi + bound_slack;
  return r;
}

std::pair<double, double> modulus_identity_check(double mu, double theta) {
  const cplx e1 = std::polar(1.0, theta);
  const cplx e2 = std::polar(1.0, 2.0 * theta);
  const double r = std::sqrt(mu);
  const double first = std::abs(std::abs(e1 * (mu + 1.0) - r * (e2 + 1.0)) - std::norm(r - e1));
  const double second = std::abs(std::abs((mu + 1.0) * e1 + r * (e2 + 1.0)) - std::norm(r + e1));
  return {first, second};
}

// ---------------------------------------------------------------------------

namespace {

template <class F>
void for_each_target(const ZGrid& g, F&& f) {
  for (double lam : g.lambdas)
    for (double eps : g.epsilons)
      for (int side = 0; side < (g.include_conjugates ? 2 : 1); ++side) {
        const cplx z(lam, side == 0 ? eps : -eps);
        f(z * z);
        f(cplx(-std::norm(z), 0.0));
      }
}

}  // namespace

ZGrid schrodinger_grid_for(const ZGrid& half_wave_grid, const SpectralOperator& s, double nu,
                           int n_lambda, int n_eps) {
  half_wave_grid.validate();
  const RealVector x = s.eigenvalues().array() + nu;
  double lo = x.minCoeff(), hi = x.maxCoeff();
  double floor = std::numeric_limits<double>::infinity();
  double top = 0.0;
  for_each_target(half_wave_grid, [&](cplx w) {
    lo = std::min(lo, w.real());
    hi = std::max(hi, w.real());
    floor = std::min(floor, min_distance(x, w));
    top = std::max(top, std::abs(w.imag()));
  });
  // The floor is shaved by a relative 1e-9 so targets at exactly the minimal
  // distance are covered despite rounding.
  floor *= 1.0 - 1e-9;
  if (!(floor > 0.0)) throw ConfigError("schrodinger_grid_for: a target lies on the spectrum");
  top = std::max(top * (1.0 + 1e-9), floor);
  ZGrid g;
  for (int k = 0; k < n_lambda; ++k) g.lambdas.push_back(lo + (hi - lo) * k / std::max(1, n_lambda - 1));
  // The hull endpoints are pushed exactly; the uniform formula may round below hi.
  g.lambdas.push_back(lo);
  g.lambdas.push_back(hi);
  for (Index j = 0; j < x.size(); ++j) g.lambdas.push_back(x(j));
  std::sort(g.lambdas.begin(), g.lambdas.end());
  g.lambdas.erase(std::unique(g.lambdas.begin(), g.lambdas.end()), g.lambdas.end());
  g.epsilons = geometric_ladder(top, floor, top > floor ? n_eps : 1);
  g.include_conjugates = half_wave_grid.include_conjugates;
  g.validate();
  return g;
}

std::vector<cplx> uncovered_targets(const ZGrid& half_wave_grid, const ZGrid& schrodinger_grid,
                                    const SpectralOperator& s, double nu) {
  const RealVector x = s.eigenvalues().array() + nu;
  const double lo = schrodinger_grid.lambda_lo(), hi = schrodinger_grid.lambda_hi();
  const double top = schrodinger_grid.eps_max(), floor = schrodinger_grid.floor();
  std::vector<cplx> out;
  for_each_target(half_wave_grid, [&](cplx w) {
    const bool ok = w.real() >= lo && w.real() <= hi && std::abs(w.imag()) <= top &&
                    min_distance(x, w) >= floor;
    if (!ok) out.push_back(w);
  });
  return out;
}

EstimateReport transfer_check(const FactorOperator& a, const SpectralOperator& s, double nu,
                              const ZGrid& half_wave_grid, const ZGrid& schrodinger_grid,
                              EstimateKind kind, double tolerance, bool record_sweep) {
  a.check_compatible(s);
  half_wave_grid.validate();
  schrodinger_grid.validate();
  if (!s.with_shift(nu).nonnegative_after_shift(s.kernel_threshold(nu)))
    throw DomainError("transfer_check: H + nu is not nonnegative", s.eigenvalues().minCoeff() + nu);
  const std::vector<cplx> missing = uncovered_targets(half_wave_grid, schrodinger_grid, s, nu);
  if (!missing.empty()) {
    std::ostringstream os;
    os << "transfer_check: Schrodinger grid does not cover " << missing.size() << " target(s):";
    for (std::size_t k = 0; k < std::min<std::size_t>(missing.size(), 8); ++k) os << " " << missing[k];
    if (missing.size() > 8) os << " ...";
    throw ConfigError(os.str());
  }

  const HalfWaveModel hw = half_wave_model(a, s, nu);
  EstimateReport c = sweep_constant(SandwichEvaluator(hw.factor, hw.root), half_wave_grid, kind,
                                    record_sweep, "transfer");
  const SpectralOperator q(s.eigenvalues().array() + nu, s.eigenbasis(), 0.0, s.kernel_tolerance());
  const EstimateReport ar = smoothness_constant(a, q, schrodinger_grid, kind);

  const double factor = kPi + 3.0;
  c.bound_name = "(pi+3)*a*(1+tol)";
  c.bound_value = factor * ar.constant * (1.0 + tolerance);
  c.residuals["a"] = ar.constant;
  c.residuals["a_argmax_lambda"] = ar.argmax.lambda;
  c.residuals["a_argmax_eps"] = ar.argmax.eps;
  c.residuals["schrodinger_eps_floor"] = schrodinger_grid.floor();
  c.residuals["ratio_C_over_a"] = ar.constant > 0.0 ? c.constant / ar.constant : 0.0;
  c.residuals["kernel_rank_deficit"] = static_cast<double>(s.dim() - hw.projection.rank);
  c.residuals["tolerance"] = tolerance;
  c.verdict = c.constant <= c.bound_value ? Verdict::pass : Verdict::fail;
  for (const auto& p : ar.skipped) c.skipped.push_back(p);
  return c;
}

}  // namespace ksmooth
