#pragma once

// Mixed space-time norms and desk-scale surrogates for the half-wave
// Strichartz estimates: admissibility, the H^{1/4} versus |D|^{1/2}
// comparison, the weighted L^2 bounds, and per-sample Strichartz ratios.
//
// Time is discretised by cells of width dt on [0, t_max]; a field stores one
// slice per cell, sampled at the cell centre, and the temporal norm is the
// rectangle rule over those cells. Spatial norms are Riemann sums with cell
// volume h^n; q = inf uses the grid maximum, a lower bound for the continuum sup.

#include "ksmooth/flows.hpp"
#include "ksmooth/models.hpp"
#include "ksmooth/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ksmooth {

struct AdmissiblePair {
  int n = 3;
  double p = 4.0;  // may be +inf
  double q = 4.0;  // may be +inf
};

struct Admissibility {
  bool ok = false;
  std::string diagnostic;  // names the violated constraint, empty when ok
};

Admissibility check_admissible(int n, double p, double q);

struct SpaceTimeField {
  GridModel grid;
  double dt = 1.0;
  std::vector<Vector> slices;  // slices[k] ~ u((k + 1/2) dt)

  void validate() const;  // ValidationError
};

double mixed_norm(const SpaceTimeField& u, double p, double q);

// ||f||_{L^q} of one grid function, q = inf allowed.
double spatial_norm(const GridModel& g, const Vector& f, double q);

// P |D|^{power} with P the projection off the zero mode. For power 0 the
// zero mode is kept when keep_zero_mode is set, giving the identity.
FourierMultiplier derivative_power(const GridModel& g, double power, Lattice lattice,
                                   bool keep_zero_mode = false);

// max over trials of ||H^{1/4} f|| / |||D|^{1/2} f|| on zero-mean random f,
// the exact operator norm ||H^{1/4} |D|^{-1/2} P||, and the residual
// | ||D^{-1/2} H^{1/2} D^{-1/2}|| - ||H^{1/4} D^{-1/2} P||^2 |.
// `lattice` selects the |D| symbol; the stencil lattice matches the
// finite-difference Laplacian so that the free case gives exactly 1.
EstimateReport hardy_interp_check(const SpectralOperator& h, const GridModel& g, int trials,
                                  std::uint64_t seed, Lattice lattice = Lattice::stencil);

// || <x>^{s_plus} |D|^{-d} P <x>^{-s_minus} |D|^{d} ||, P dropped when d = 0.
double weighted_sandwich_norm(const GridModel& g, double s_plus, double s_minus, double d,
                              double* adjoint_residual = nullptr);

// The two L^2 bounds
//   <x>^{1/2+eps} |D|^{-1/2} <x>^{-1/2-eps'} |D|^{1/2}
//   <x>^{1/2+eps} |D|^{1/2} <x>^{-1/2-eps'} |D|^{-1/2}
// (kernel projected) on one grid. Needs 0 < eps < eps'.
EstimateReport weighted_bound_check(const GridModel& g, double eps, double eps_prime);

struct StrichartzResult {
  EstimateReport report;
  std::vector<double> wave_ratios;  // ||D^{1/q-1/p} e^{it sqrt H} f||_{LpLq} / ||f||_{H^{1/2}}
  std::vector<double> sine_ratios;  // ||D^{1/q-1/p} sin(t sqrt H) H^{-1/2} f||_{LpLq} / ||f||_{H^{-1/2}}
};

// Data must be nonzero and zero-mean. The time grid supplies t_max and dt only.
StrichartzResult strichartz_ratio(const SpectralOperator& h, const GridModel& g,
                                  const AdmissiblePair& pair, const std::vector<Vector>& data,
                                  const TimeGrid& tg, Lattice lattice = Lattice::stencil);
// Free flow through the fast transforms; `h` is the Laplacian multiplier.
StrichartzResult strichartz_ratio(const FourierMultiplier& h, const AdmissiblePair& pair,
                                  const std::vector<Vector>& data, const TimeGrid& tg,
                                  Lattice lattice = Lattice::stencil);

}  // namespace ksmooth
