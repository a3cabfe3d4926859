#include "ksmooth/flows.hpp"

#include "ksmooth/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ksmooth {

namespace {

// (e^z - 1) / z, accurate near 0.
cplx phi1(cplx z) {
  if (std::abs(z) < 1e-4) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  return (std::exp(z) - 1.0) / z;
}

// int_alpha^beta e^{-i (t - s) w} ds for alpha <= beta <= t.
cplx exp_integral(double w, double t, double alpha, double beta) {
  const double len = beta - alpha;
  if (len <= 0.0) return 0.0;
  return std::exp(-kI * w * (t - beta)) * len * phi1(-kI * w * len);
}

// Simpson value on `samples` and its distance to the half-resolution rule.
std::pair<double, double> simpson_with_error(const std::vector<double>& samples, double step) {
  const double fine = composite_simpson(samples, step);
  const std::size_t n = samples.size() - 1;
  if (n % 4 != 0) return {fine, 0.0};
  std::vector<double> coarse;
  coarse.reserve(n / 2 + 1);
  for (std::size_t k = 0; k <= n; k += 2) coarse.push_back(samples[k]);
  const double rough = composite_simpson(coarse, 2.0 * step);
  return {fine, std::abs(fine - rough) / 15.0};
}

DampedNormResult finish(double integral, double integral_error, double tail, double eps) {
  DampedNormResult r;
  r.eps = eps;
  r.value = std::sqrt(std::max(integral, 0.0));
  const double err = integral_error + tail;
  r.error_estimate = r.value > 0.0 ? err / (2.0 * r.value) : std::sqrt(err);
  return r;
}

}  // namespace

RealVector flow_frequencies(const SpectralOperator& s, const Flow& flow) {
  if (flow.kind == FlowKind::schrodinger) return s.eigenvalues();
  const RealVector x = s.eigenvalues().array() + flow.nu;
  const double thr = s.kernel_threshold(flow.nu);
  RealVector w(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    if (x(j) < -thr) {
      std::ostringstream os;
      os << "half-wave flow needs H + nu >= 0, found eigenvalue " << x(j);
      throw DomainError(os.str(), x(j));
    }
    w(j) = x(j) <= thr ? 0.0 : std::sqrt(x(j));
  }
  return w;
}

// ---------------------------------------------------------------------------

void TimeGrid::validate() const {
  if (!(t_max > 0.0) || !(dt > 0.0) || !(dt <= t_max))
    throw ConfigError("TimeGrid: need 0 < dt <= t_max");
  if (!(damping >= 0.0)) throw ConfigError("TimeGrid: damping must be >= 0");
  if (damping > 0.0 && t_max * damping < 20.0) {
    std::ostringstream os;
    os << "TimeGrid: t_max * eps = " << t_max * damping << " < 20; damped tail not negligible";
    throw ConfigError(os.str());
  }
}

void TimeGrid::check_resolution(double omega_max) const {
  if (omega_max > 0.0 && dt > 0.1 / omega_max) {
    std::ostringstream os;
    os << "TimeGrid: dt = " << dt << " does not resolve frequency " << omega_max
       << " (need dt <= " << 0.1 / omega_max << ")";
    throw ConfigError(os.str());
  }
}

int TimeGrid::steps() const {
  int n = static_cast<int>(std::ceil(t_max / dt - 1e-9));
  n = std::max(n, 4);
  n += n % 4 == 0 ? 0 : 4 - n % 4;  // multiple of 4 so the half-resolution rule exists
  return n;
}

// ---------------------------------------------------------------------------

void StepSignal::validate(Index dim, double t_max) const {
  std::vector<std::pair<double, double>> spans;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const StepPiece& p = pieces[k];
    std::ostringstream where;
    where << "StepSignal piece " << k << " [" << p.t_start << ", " << p.t_end << "]";
    if (!(p.t_start < p.t_end)) throw ValidationError(where.str() + ": empty interval");
    if (p.t_start < 0.0 || p.t_end > t_max)
      throw ValidationError(where.str() + ": outside [0, t_max]");
    if (p.value.size() != dim) throw ValidationError(where.str() + ": wrong vector dimension");
    if (!p.value.allFinite()) throw ValidationError(where.str() + ": non-finite value");
    spans.emplace_back(p.t_start, p.t_end);
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t k = 1; k < spans.size(); ++k)
    if (spans[k].first < spans[k - 1].second) {
      std::ostringstream os;
      os << "StepSignal: pieces overlap near t = " << spans[k].first;
      throw ValidationError(os.str());
    }
}

double StepSignal::damped_norm(double eps) const {
  double sum = 0.0;
  for (const StepPiece& p : pieces) {
    const double w = eps == 0.0 ? p.t_end - p.t_start
                                : (std::exp(-2.0 * eps * p.t_start) - std::exp(-2.0 * eps * p.t_end)) /
                                      (2.0 * eps);
    sum += p.value.squaredNorm() * w;
  }
  return std::sqrt(sum);
}

StepSignal StepSignal::scaled(cplx c) const {
  StepSignal out = *this;
  for (StepPiece& p : out.pieces) p.value *= c;
  return out;
}

// ---------------------------------------------------------------------------

Vector evolve(const SpectralOperator& s, const Flow& flow, double t, const Vector& v) {
  if (v.size() != s.dim()) throw ValidationError("evolve: vector has wrong dimension");
  const RealVector w = flow_frequencies(s, flow);
  const Matrix& u = s.eigenbasis();
  Vector c = u.adjoint() * v;
  for (Index j = 0; j < c.size(); ++j) c(j) *= std::exp(-kI * t * w(j));
  return u * c;
}

DampedNormResult homogeneous_smoothing_norm(const FactorOperator& a, const SpectralOperator& s,
                                            const Flow& flow, const Vector& v, const TimeGrid& g,
                                            std::vector<std::pair<double, double>>* trace) {
  a.check_compatible(s);
  g.validate();
  if (!(g.damping > 0.0))
    throw ConfigError("homogeneous_smoothing_norm: damping must be > 0 for pure point spectra");
  if (v.size() != s.dim()) throw ValidationError("homogeneous_smoothing_norm: wrong vector dimension");
  const RealVector w = flow_frequencies(s, flow);
  g.check_resolution(w.cwiseAbs().maxCoeff());

  const Matrix b = a.entries() * s.eigenbasis();
  const Vector c0 = s.eigenbasis().adjoint() * v;
  const int n = g.steps();
  const double step = g.t_max / n;

  std::vector<double> forward(static_cast<std::size_t>(n + 1)), backward(forward.size());
  Vector c(c0.size());
  for (int k = 0; k <= n; ++k) {
    const double t = k * step;
    const double damp = std::exp(-2.0 * g.damping * t);
    for (int side = 0; side < 2; ++side) {
      const double ts = side == 0 ? t : -t;
      for (Index j = 0; j < c.size(); ++j) c(j) = c0(j) * std::exp(-kI * ts * w(j));
      const double val = damp * (b * c).squaredNorm();
      (side == 0 ? forward : backward)[static_cast<std::size_t>(k)] = val;
    }
  }
  if (trace) {
    trace->clear();
    for (int k = n; k >= 1; --k) trace->emplace_back(-k * step, backward[static_cast<std::size_t>(k)]);
    for (int k = 0; k <= n; ++k) trace->emplace_back(k * step, forward[static_cast<std::size_t>(k)]);
  }
  const auto [fi, fe] = simpson_with_error(forward, step);
  const auto [bi, be] = simpson_with_error(backward, step);
  // Beyond |t| = T the integrand is at most ||B||^2 ||v||^2 e^{-2 eps |t|}.
  const double bound = operator_norm(b) * c0.norm();
  const double tail = bound * bound * std::exp(-2.0 * g.damping * g.t_max) / g.damping;
  return finish(fi + bi, fe + be, tail, g.damping);
}

DampedNormResult duhamel_norm(const FactorOperator& a, const SpectralOperator& s, const Flow& flow,
                              const StepSignal& h, const TimeGrid& g) {
  a.check_compatible(s);
  g.validate();
  h.validate(a.rows(), g.t_max);
  const RealVector w = flow_frequencies(s, flow);
  g.check_resolution(w.cwiseAbs().maxCoeff());
  const Index dim = s.dim();

  const Matrix b = a.entries() * s.eigenbasis();
  // mid in the eigenbasis: 1, or omega^{-1} off the kernel for the half-wave flow.
  RealVector mid = RealVector::Ones(dim);
  if (flow.kind == FlowKind::half_wave)
    for (Index j = 0; j < dim; ++j) mid(j) = w(j) > 0.0 ? 1.0 / w(j) : 0.0;

  std::vector<StepPiece> pieces = h.pieces;
  std::sort(pieces.begin(), pieces.end(),
            [](const StepPiece& x, const StepPiece& y) { return x.t_start < y.t_start; });
  std::vector<Vector> coeff;
  coeff.reserve(pieces.size());
  for (const StepPiece& p : pieces) coeff.push_back(mid.cast<cplx>().cwiseProduct(b.adjoint() * p.value));

  const int n = g.steps();
  const double step = g.t_max / n;
  std::vector<double> samples(static_cast<std::size_t>(n + 1), 0.0);
  Vector phase(dim);
  for (Index j = 0; j < dim; ++j) phase(j) = std::exp(-kI * w(j) * step);

  Vector y = Vector::Zero(dim);
  std::size_t first = 0;  // earliest piece that may still be active
  for (int k = 0; k < n; ++k) {
    const double t0 = k * step;
    const double t1 = k + 1 == n ? g.t_max : (k + 1) * step;
    y = phase.cwiseProduct(y);
    while (first < pieces.size() && pieces[first].t_end <= t0) ++first;
    for (std::size_t p = first; p < pieces.size() && pieces[p].t_start < t1; ++p) {
      const double alpha = std::max(t0, pieces[p].t_start);
      const double beta = std::min(t1, pieces[p].t_end);
      if (beta <= alpha) continue;
      for (Index j = 0; j < dim; ++j) y(j) += coeff[p](j) * exp_integral(w(j), t1, alpha, beta);
    }
    samples[static_cast<std::size_t>(k + 1)] = std::exp(-2.0 * g.damping * t1) * (b * y).squaredNorm();
  }
  const auto [integral, err] = simpson_with_error(samples, step);
  double tail = 0.0;
  if (g.damping > 0.0) {
    const double bound = operator_norm(b) * y.norm();
    tail = bound * bound * std::exp(-2.0 * g.damping * g.t_max) / (2.0 * g.damping);
  }
  return finish(integral, err, tail, g.damping);
}

// ---------------------------------------------------------------------------

std::vector<StepSignal> converse_probes(const FactorOperator& a, const SpectralOperator& s,
                                        const std::vector<double>& lambdas, double eps,
                                        const TimeGrid& g) {
  if (lambdas.empty()) throw ConfigError("converse_probes: no lambda samples");
  const SandwichEvaluator ev(a, s);
  double best = -1.0, lam_star = lambdas.front();
  for (double l : lambdas) {
    const double v = ev.norm(cplx(l, eps), SandwichKind::full);
    if (v > best) {
      best = v;
      lam_star = l;
    }
  }
  const Matrix m = ev.sandwich(cplx(lam_star, eps), SandwichKind::full);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector h0 = svd.matrixV().col(0);

  std::vector<StepSignal> out;
  const int n = g.steps();
  const double step = g.t_max / n;
  for (double delta : {eps / 4.0, eps / 2.0}) {
    StepSignal sig;
    std::ostringstream label;
    label << "tone(lambda=" << lam_star << ",delta=" << delta << ")";
    sig.label = label.str();
    sig.pieces.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double t0 = k * step;
      const double t1 = k + 1 == n ? g.t_max : (k + 1) * step;
      const double tm = 0.5 * (t0 + t1);
      sig.pieces.push_back({t0, t1, std::exp(cplx(-delta * tm, -lam_star * tm)) * h0});
    }
    out.push_back(std::move(sig));
  }
  return out;
}

DuhamelSandwich duhamel_sandwich(const FactorOperator& a, const SpectralOperator& s,
                                 const std::vector<StepSignal>& probes, double eps,
                                 const TimeGrid& g, const std::vector<double>& lambdas,
                                 double tolerance, double converse_slack) {
  if (probes.empty()) throw ConfigError("duhamel_sandwich: no probes");
  if (!(eps > 0.0)) throw ConfigError("duhamel_sandwich: eps must be > 0");
  if (g.damping != eps) throw ConfigError("duhamel_sandwich: time grid damping differs from eps");

  DuhamelSandwich out;
  EstimateReport& r = out.report;
  r.name = "duhamel_sandwich";
  r.kind = EstimateKind::supersmooth;

  ZGrid grid;
  grid.lambdas = lambdas;
  grid.epsilons = {eps};
  const EstimateReport ar = smoothness_constant(a, s, grid, EstimateKind::supersmooth);
  r.grid = grid.descriptor();

  bool converse_present = false;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const StepSignal& p = probes[k];
    ProbeRecord rec;
    rec.label = p.label.empty() ? "probe-" + std::to_string(k) : p.label;
    rec.signal = p.damped_norm(eps);
    if (rec.signal == 0.0) continue;  // the zero signal carries no information
    rec.duhamel = duhamel_norm(a, s, Flow::schrodinger(), p, g).value;
    rec.ratio = rec.duhamel / rec.signal;
    converse_present = converse_present || rec.label.rfind("tone", 0) == 0;
    if (rec.ratio > r.constant || out.probes.empty()) {
      r.constant = std::max(r.constant, rec.ratio);
      r.argmax = {static_cast<double>(k), eps};
    }
    out.probes.push_back(rec);
  }
  const double a_eps = ar.constant;
  r.bound_name = "2*a(eps)*(1+tol)";
  r.bound_value = 2.0 * a_eps * (1.0 + tolerance);
  r.residuals["a_eps"] = a_eps;
  r.residuals["a_argmax_lambda"] = ar.argmax.lambda;
  r.residuals["eps"] = eps;
  r.residuals["ratio_D_over_a"] = a_eps > 0.0 ? r.constant / a_eps : 0.0;
  r.residuals["probes"] = static_cast<double>(out.probes.size());

  if (r.constant > r.bound_value) {
    r.verdict = Verdict::fail;
  } else if (converse_present && a_eps > 2.0 * r.constant * (1.0 + converse_slack)) {
    r.verdict = Verdict::warn;
    r.notes.push_back("converse bound a(eps) <= 2 D(eps) not met by the probe set");
    for (const ProbeRecord& p : out.probes) r.notes.push_back("probe " + p.label);
  } else {
    r.verdict = Verdict::pass;
  }
  return out;
}

}  // namespace ksmooth
