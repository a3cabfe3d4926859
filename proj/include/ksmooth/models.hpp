#pragma once

// Concrete operators on periodic or Dirichlet grids: Laplacians, Fourier
// multipliers, weights, inverse-square potentials and Peierls-discretized
// magnetic Schrodinger operators.
//
// Grid functions are flattened with axis 0 fastest:
//   flat = j0 + N j1 + N^2 j2.
// Periodic points sit at -L/2 + j h with h = L/N; Dirichlet points are the N
// interior nodes -L/2 + (j+1) h with h = L/(N+1).

#include "ksmooth/spectral.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ksmooth {

enum class Boundary { periodic, dirichlet };
enum class LaplacianScheme { spectral, finite_difference };

struct GridModel {
  int n = 1;
  int N = 64;
  double L = 6.283185307179586;
  Boundary boundary = Boundary::periodic;
  Index cap = 4096;

  double spacing() const;
  Index size() const;
  void validate() const;  // ConfigError

  double coordinate(int j) const;
  std::array<double, 3> point(Index flat) const;  // unused axes are 0
  double radius(Index flat) const;
  double cell_volume() const;
};

// 1-D frequencies per mode index k = 0..N-1. Periodic: 2 pi m / L with m the
// symmetric representative of k (Nyquist taken as +N/2). Dirichlet: pi (k+1) / L.
double continuum_frequency(const GridModel& g, int k);
// Second-order stencil symbol (4/h^2) sin^2(...) for the same mode.
double stencil_symbol(const GridModel& g, int k);

// Operator diagonal in the separable Fourier (periodic) or sine (Dirichlet)
// basis, applied through per-axis transforms.
class FourierMultiplier {
 public:
  FourierMultiplier(GridModel g, RealVector symbol);

  const GridModel& grid() const noexcept { return grid_; }
  const RealVector& symbol() const noexcept { return symbol_; }

  Vector forward(const Vector& v) const;  // U* v
  Vector inverse(const Vector& c) const;  // U c
  // symbol^exponent applied to v; powers of a zero symbol follow fn::Power.
  Vector apply_power(const Vector& v, double exponent) const;
  Vector apply_diagonal(const Vector& v, const Vector& d) const;

  Matrix basis() const;  // dense U in mode order
  Matrix dense() const;  // U diag(symbol) U*
  SpectralOperator spectral() const;  // modes sorted by symbol, ties by mode index

 private:
  Vector transform(const Vector& v, bool adjoint) const;

  GridModel grid_;
  RealVector symbol_;
  Matrix axis_basis_;  // N x N, orthonormal columns
};

// Symbol of the Laplacian: |xi|^2 (spectral) or the stencil symbol (finite difference).
FourierMultiplier laplacian_multiplier(const GridModel& g, LaplacianScheme scheme);
HermitianMatrix build_laplacian(const GridModel& g, LaplacianScheme scheme);

enum class SymbolKind {
  frac_laplacian,  // |xi|^{2 alpha}, exponent = alpha
  abs_power,       // |xi|^s
  japanese,        // <xi>^s
};
// continuum: |xi|^2 = sum (2 pi m_i / L)^2. stencil: |xi|^2 = stencil symbol,
// so that |D|^2 is exactly the finite-difference Laplacian.
enum class Lattice { continuum, stencil };

struct MultiplierSpec {
  SymbolKind symbol = SymbolKind::abs_power;
  double exponent = 1.0;
  Lattice lattice = Lattice::continuum;
};

double symbol_value(const MultiplierSpec& m, double xi_squared);
// Dirichlet grids accept only symbols polynomial in |xi|^2; anything else is a ConfigError.
FourierMultiplier multiplier(const GridModel& g, const MultiplierSpec& m);
SpectralOperator build_multiplier(const GridModel& g, const MultiplierSpec& m);

enum class WeightKind { homogeneous, japanese };

// homogeneous: max(|x|, r0)^{-exponent}, exponent in [0, 4].
// japanese:    <x>^{-exponent}, |exponent| <= 8.
// r0 defaults to one grid spacing and may not be smaller.
struct WeightSpec {
  WeightKind kind = WeightKind::japanese;
  double exponent = 1.0;
  std::optional<double> r0;
};

RealVector weight_values(const GridModel& g, const WeightSpec& w);
FactorOperator build_weight(const GridModel& g, const WeightSpec& w);

struct InverseSquareModel {
  HermitianMatrix h;
  RealVector potential;
  double r0 = 0.0;
  bool pointwise_bounds = false;  // C/|x|^2 >= V >= -c/|x|^2 at every sample
  bool radial_condition = false;  // -d_r(|x| V) >= -c/|x|^2 at every sample
};

// H = -Delta_h + V with V = -c / max(|x|, r0)^2 and the finite-difference
// Laplacian. Needs n >= 3 and 0 <= c < (n-2)^2/4.
InverseSquareModel build_inverse_square(const GridModel& g, double c, double C,
                                        std::optional<double> r0 = std::nullopt);

double min_eigenvalue(const HermitianMatrix& h);

struct DecaySpec {
  double C = 1.0;
  double eps0 = 0.5;
  bool check = false;
};

// Fields sampled on the grid. links[i][x] = h A_i(x + h e_i / 2), the Peierls
// phase of the bond from x to x + h e_i; a_sites holds A at the grid points
// for the decay check.
struct FieldSpec {
  std::vector<RealVector> links;
  std::vector<RealVector> a_sites;
  RealVector potential;
  DecaySpec decay;
  std::string a_profile = "zero";
  std::string v_profile = "zero";
  // Recorded, never verified: <x>^{1+eps} A in the Sobolev class required by
  // the magnetic Strichartz theorem, and absence of a zero resonance.
  bool sobolev_assumed = false;
  bool resonance_free_assumed = false;
};

// Profiles are "name key=value ...":
//   A: zero | swirl amp= width= | decay amp= eps0=
//   V: zero | constant value= | gaussian amp= width= | decay amp= eps0=
// swirl is A = amp e^{-|x|^2/width^2} (-x1, x0, 0) and needs n >= 2;
// decay sets |A| = amp <x>^{-1-eps0} (equal components) or V = amp <x>^{-2-eps0}.
FieldSpec sample_fields(const GridModel& g, const std::string& a_profile,
                        const std::string& v_profile, const DecaySpec& decay = {});

struct DecayCheck {
  bool holds = true;
  double worst_ratio = 0.0;  // max of (|A| + <x>|V|) / (C <x>^{-1-eps0})
  Index worst_index = 0;
  std::array<double, 3> worst_point{};
};
DecayCheck check_decay(const GridModel& g, const FieldSpec& f);

// links += chi(x + h e_i) - chi(x). The decay flag is cleared since a_sites
// no longer describe the shifted potential.
FieldSpec gauge_shift(const GridModel& g, const FieldSpec& f, const RealVector& chi);

struct MagneticModel {
  HermitianMatrix h;
  std::optional<DecayCheck> decay;
};

// (i nabla + A)^2 + V on a periodic grid by Peierls substitution:
// H(x, x + h e_i) = -e^{-i links_i(x)} / h^2, H(x, x) = 2n/h^2 + V(x).
// A decay check failure is a ValidationError naming the worst point.
MagneticModel build_magnetic(const GridModel& g, const FieldSpec& f);

}  // namespace ksmooth
