#pragma once

// Unitary flows e^{-itH} and e^{-it sqrt(H+nu)}, damped L^2-in-time norms of
// A e^{-itH} v, and Duhamel integrals driven by step signals.
//
// All evolution is diagonal in the eigenbasis. The inner Duhamel integral is
// exact per mode; only the outer time integral is numerical (composite
// Simpson, error estimated against the half-resolution rule).

#include "ksmooth/estimators.hpp"
#include "ksmooth/report.hpp"
#include "ksmooth/spectral.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ksmooth {

enum class FlowKind { schrodinger, half_wave };

struct Flow {
  FlowKind kind = FlowKind::schrodinger;
  double nu = 0.0;  // half-wave only

  static Flow schrodinger() { return {FlowKind::schrodinger, 0.0}; }
  static Flow half_wave(double nu) { return {FlowKind::half_wave, nu}; }
};

// Mode frequencies omega_j: lambda_j, or sqrt(lambda_j + nu) (kernel -> 0).
RealVector flow_frequencies(const SpectralOperator& s, const Flow& flow);

struct TimeGrid {
  double t_max = 1.0;
  double dt = 0.01;
  double damping = 0.0;  // eps

  void validate() const;                      // t_max, dt > 0; t_max * eps >= 20 when eps > 0
  void check_resolution(double omega_max) const;  // dt <= 0.1 / omega_max
  // Number of steps on [0, t_max]: ceil(t_max / dt) rounded up to even.
  int steps() const;
};

struct StepPiece {
  double t_start;
  double t_end;
  Vector value;
};

// Piecewise-constant h(t); zero outside the pieces.
struct StepSignal {
  std::vector<StepPiece> pieces;
  std::string label;

  // Pieces disjoint (touching endpoints allowed), nonempty intervals inside
  // [0, t_max], every value of dimension `dim`. Throws ValidationError.
  void validate(Index dim, double t_max) const;
  // ||e^{-eps t} h||_{L^2(0, inf)}, closed form.
  double damped_norm(double eps) const;
  StepSignal scaled(cplx c) const;
};

struct DampedNormResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double eps = 0.0;
};

Vector evolve(const SpectralOperator& s, const Flow& flow, double t, const Vector& v);

// (int_{-T}^{T} e^{-2 eps |t|} ||A evolve(t) v||^2 dt)^{1/2}. `trace`, when
// given, receives (t, integrand) pairs.
DampedNormResult homogeneous_smoothing_norm(const FactorOperator& a, const SpectralOperator& s,
                                            const Flow& flow, const Vector& v, const TimeGrid& g,
                                            std::vector<std::pair<double, double>>* trace = nullptr);

// || e^{-eps t} int_0^t A evolve(t - s) [mid] A* h(s) ds ||_{L^2(0, T)}, with
// mid = I for the Schrodinger flow and (H+nu)^{-1/2} P for the half-wave flow.
DampedNormResult duhamel_norm(const FactorOperator& a, const SpectralOperator& s, const Flow& flow,
                              const StepSignal& h, const TimeGrid& g);

// Tone probes sigma(t) h0 with sigma(t) = e^{-i lambda* t - delta t},
// delta in {eps/4, eps/2}, sampled as steps of width g.dt on [0, t_max].
// lambda* is the arg-max of ||A R(lambda + i eps) A*|| over `lambdas` and h0
// its top right singular vector.
std::vector<StepSignal> converse_probes(const FactorOperator& a, const SpectralOperator& s,
                                        const std::vector<double>& lambdas, double eps,
                                        const TimeGrid& g);

struct ProbeRecord {
  std::string label;
  double duhamel = 0.0;
  double signal = 0.0;
  double ratio = 0.0;
};

struct DuhamelSandwich {
  EstimateReport report;
  std::vector<ProbeRecord> probes;
};

// D(eps) = max over probes of duhamel_norm / ||e^{-eps t} h|| against
// a(eps) = sup_lambda ||A R(lambda + i eps) A*||.
// fail  if D > 2 a (1 + tolerance);
// warn  if converse probes are present and a > 2 D (1 + converse_slack);
// pass  otherwise.
DuhamelSandwich duhamel_sandwich(const FactorOperator& a, const SpectralOperator& s,
                                 const std::vector<StepSignal>& probes, double eps,
                                 const TimeGrid& g, const std::vector<double>& lambdas,
                                 double tolerance = 0.05, double converse_slack = 0.05);

}  // namespace ksmooth
