#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ksmooth/random.hpp"
#include "ksmooth/strichartz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace ksmooth;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

GridModel grid(int n, int N, double L) {
  GridModel g;
  g.n = n;
  g.N = N;
  g.L = L;
  return g;
}

SpaceTimeField constant_field(const GridModel& g, int slices, double dt, cplx value) {
  SpaceTimeField u{g, dt, {}};
  for (int k = 0; k < slices; ++k) u.slices.push_back(Vector::Constant(g.size(), value));
  return u;
}

// e^{i x_0} on the grid.
Vector plane_wave(const GridModel& g) {
  Vector f(g.size());
  for (Index j = 0; j < g.size(); ++j) f(j) = std::exp(kI * g.point(j)[0]);
  return f;
}

}  // namespace

TEST_CASE("wave admissibility") {
  CHECK(check_admissible(3, 4.0, 4.0).ok);
  CHECK(check_admissible(3, kInf, 2.0).ok);
  CHECK(check_admissible(5, 4.0, 8.0 / 3.0).ok);
  CHECK(check_admissible(4, 4.0, 3.0).ok);

  const Admissibility low_p = check_admissible(3, 2.0, kInf);
  CHECK_FALSE(low_p.ok);
  CHECK(low_p.diagnostic.find("exceed 2") != std::string::npos);
  const Admissibility scaling = check_admissible(3, 3.0, 4.0);
  CHECK_FALSE(scaling.ok);
  CHECK(scaling.diagnostic.find("scaling") != std::string::npos);
  CHECK_FALSE(check_admissible(2, 4.0, kInf).ok);
  CHECK_FALSE(check_admissible(3, 4.0, 1.5).ok);
  // The open endpoint q = 2(n-1)/(n-3) is excluded.
  CHECK_FALSE(check_admissible(5, 2.0 + 1e-9, 4.0).ok);
}

TEST_CASE("mixed norm examples") {
  const GridModel g = grid(1, 8, 1.0);
  SUBCASE("u = 1 on the unit slab") {
    const SpaceTimeField u = constant_field(g, 10, 0.1, 1.0);
    CHECK(mixed_norm(u, 4.0, 3.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mixed_norm(u, kInf, kInf) == 1.0);
  }
  SUBCASE("indicator of the first half of the time interval") {
    SpaceTimeField u = constant_field(g, 10, 0.1, 1.0);
    for (int k = 5; k < 10; ++k) u.slices[static_cast<std::size_t>(k)].setZero();
    CHECK(mixed_norm(u, 2.0, 2.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("p = q = 2 is the flat space-time L2 norm") {
    Rng rng(1, "mixed-norm");
    SpaceTimeField u{grid(2, 8, 3.0), 0.25, {}};
    double flat = 0.0;
    for (int k = 0; k < 6; ++k) {
      u.slices.push_back(rng.complex_gaussian(64));
      flat += u.slices.back().squaredNorm();
    }
    const double cell = 0.25 * std::pow(3.0 / 8.0, 2);
    CHECK(mixed_norm(u, 2.0, 2.0) == doctest::Approx(std::sqrt(cell * flat)).epsilon(1e-13));
  }
  SUBCASE("homogeneity and Holder") {
    Rng rng(2, "mixed-norm");
    SpaceTimeField u{grid(1, 16, 2.0), 0.5, {}};
    for (int k = 0; k < 4; ++k) u.slices.push_back(rng.complex_gaussian(16));
    SpaceTimeField v = u;
    for (auto& s : v.slices) s *= cplx(0.0, -3.0);
    CHECK(mixed_norm(v, 4.0, 6.0) == doctest::Approx(3.0 * mixed_norm(u, 4.0, 6.0)).epsilon(1e-13));
    // On a set of measure T |Omega| = 4, ||u||_{L2 L2} <= 4^{1/4} ||u||_{L4 L4}.
    CHECK(mixed_norm(u, 2.0, 2.0) <= std::pow(4.0, 0.25) * mixed_norm(u, 4.0, 4.0) * (1 + 1e-12));
  }
  SUBCASE("invalid fields") {
    CHECK_THROWS_AS(mixed_norm(SpaceTimeField{g, 0.1, {}}, 2.0, 2.0), ValidationError);
    CHECK_THROWS_AS(mixed_norm(constant_field(g, 2, 0.0, 1.0), 2.0, 2.0), ValidationError);
    CHECK_THROWS_AS(mixed_norm(constant_field(g, 2, 0.1, 1.0), 0.5, 2.0), ValidationError);
  }
}

TEST_CASE("derivative powers drop the zero mode") {
  const GridModel g = grid(1, 8, 2 * kPi);
  const FourierMultiplier d = derivative_power(g, -0.5, Lattice::continuum);
  CHECK(d.symbol().minCoeff() == 0.0);
  CHECK(d.symbol().maxCoeff() == doctest::Approx(1.0));
  const FourierMultiplier id = derivative_power(g, 0.0, Lattice::continuum, true);
  CHECK((id.symbol().array() - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("Hardy interpolation check: free operator gives 1") {
  const GridModel g = grid(2, 8, 5.0);
  const SpectralOperator h = decompose(build_laplacian(g, LaplacianScheme::finite_difference));
  const EstimateReport r = hardy_interp_check(h, g, 10, 7);
  CHECK(r.verdict == Verdict::pass);
  CHECK(std::abs(r.residuals.at("op_norm") - 1.0) <= 1e-10);
  CHECK(r.constant <= 1.0 + 1e-10);
  CHECK(r.residuals.at("hd_residual") <= 1e-10);
}

TEST_CASE("Hardy interpolation check: constant potential shifts each mode") {
  const GridModel g = grid(1, 16, 4.0);
  const double v = 0.7;
  const MagneticModel m = build_magnetic(g, sample_fields(g, "zero", "constant value=0.7"));
  const EstimateReport r = hardy_interp_check(decompose(m.h), g, 20, 3);
  // Per mode the ratio is ((sigma + V) / sigma)^{1/4}, largest on the lowest mode.
  const double sigma = stencil_symbol(g, 1);
  const double expect = std::pow((sigma + v) / sigma, 0.25);
  CHECK(r.residuals.at("op_norm") == doctest::Approx(expect).epsilon(1e-10));
  CHECK(r.constant <= expect * (1 + 1e-10));
  CHECK(r.residuals.at("min_trial_ratio") >= std::pow((stencil_symbol(g, 8) + v) / stencil_symbol(g, 8), 0.25) - 1e-10);
  CHECK(r.verdict == Verdict::pass);
  CHECK_THROWS_AS(hardy_interp_check(decompose(m.h), g, 0, 3), ConfigError);
  CHECK_THROWS_AS(hardy_interp_check(decompose(m.h), grid(1, 8, 4.0), 3, 3), ValidationError);
}

TEST_CASE("weighted sandwich norms") {
  const GridModel g = grid(1, 32, 16.0);
  // Without derivatives the sandwich is a multiplication by <x>^{s+ - s-}.
  CHECK(weighted_sandwich_norm(g, 0.5, 0.5, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(weighted_sandwich_norm(g, 0.5, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  const double far = std::hypot(1.0, g.coordinate(0));
  CHECK(weighted_sandwich_norm(g, 1.0, 0.5, 0.0) == doctest::Approx(std::sqrt(far)).epsilon(1e-12));

  const EstimateReport r = weighted_bound_check(g, 0.1, 0.2);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.residuals.at("adjoint_residual") <= 1e-10 * std::max(1.0, r.constant));
  CHECK(std::isfinite(r.constant));
  CHECK(r.constant == std::max(r.residuals.at("norm_dneg_first"), r.residuals.at("norm_dpos_first")));
}

TEST_CASE("weighted bound stays bounded under refinement") {
  std::vector<double> norms;
  for (int N : {32, 64, 128}) norms.push_back(weighted_bound_check(grid(1, N, 16.0), 0.1, 0.3).constant);
  for (double x : norms) CHECK(std::isfinite(x));
  CHECK(norms.back() / norms.front() <= 1.5);
}

TEST_CASE("weighted bound arguments") {
  const GridModel g = grid(1, 16, 8.0);
  CHECK_THROWS_AS(weighted_bound_check(g, 0.2, 0.2), ConfigError);
  CHECK_THROWS_AS(weighted_bound_check(g, 0.3, 0.2), ConfigError);
  CHECK_THROWS_AS(weighted_bound_check(g, 0.0, 0.2), ConfigError);
  GridModel d = g;
  d.boundary = Boundary::dirichlet;
  CHECK_THROWS_AS(weighted_bound_check(d, 0.1, 0.2), ConfigError);
}

TEST_CASE("Strichartz ratio of a single plane wave") {
  const GridModel g = grid(3, 8, 2 * kPi);
  const FourierMultiplier free = laplacian_multiplier(g, LaplacianScheme::finite_difference);
  const AdmissiblePair pair{3, 4.0, 4.0};
  const TimeGrid tg{4.0, 4.0 / 64, 0.0};
  const StrichartzResult r = strichartz_ratio(free, pair, {plane_wave(g)}, tg);

  // |e^{it omega} f| = 1 everywhere, so the norm is T^{1/p} |Omega|^{1/q}; the
  // H^{1/2} norm is sigma^{1/4} |Omega|^{1/2}.
  const double sigma = stencil_symbol(g, 1), omega = std::sqrt(sigma);
  const double vol = std::pow(g.L, 3);
  const double wave = std::pow(4.0, 0.25) * std::pow(vol, 0.25) / (std::pow(sigma, 0.25) * std::sqrt(vol));
  CHECK(r.wave_ratios.at(0) == doctest::Approx(wave).epsilon(1e-12));

  double sum = 0.0;
  for (int k = 0; k < 64; ++k) sum += tg.dt * std::pow(std::abs(std::sin((k + 0.5) * tg.dt * omega)), 4);
  const double sine = std::pow(sum, 0.25) * std::pow(vol, 0.25) / omega / (std::pow(sigma, -0.25) * std::sqrt(vol));
  CHECK(r.sine_ratios.at(0) == doctest::Approx(sine).epsilon(1e-12));
  CHECK(r.report.constant == r.wave_ratios.at(0));
}

TEST_CASE("Strichartz ratio: spectral and transform paths agree, translation invariance") {
  const GridModel g = grid(3, 8, 2 * kPi);
  const FourierMultiplier free = laplacian_multiplier(g, LaplacianScheme::finite_difference);
  const SpectralOperator h = decompose(build_laplacian(g, LaplacianScheme::finite_difference));
  const AdmissiblePair pair{3, 4.0, 4.0};
  const TimeGrid tg{2.0, 2.0 / 16, 0.0};
  Rng rng(4, "strichartz");
  std::vector<Vector> data;
  for (int k = 0; k < 3; ++k) {
    Vector f = rng.complex_gaussian(g.size());
    f.array() -= f.mean();
    data.push_back(f);
  }
  const StrichartzResult a = strichartz_ratio(free, pair, data, tg);
  const StrichartzResult b = strichartz_ratio(h, g, pair, data, tg);
  for (std::size_t k = 0; k < data.size(); ++k) {
    CHECK(b.wave_ratios[k] == doctest::Approx(a.wave_ratios[k]).epsilon(1e-9));
    CHECK(b.sine_ratios[k] == doctest::Approx(a.sine_ratios[k]).epsilon(1e-9));
  }

  // Cyclic shift by one cell along each axis.
  std::vector<Vector> shifted;
  for (const Vector& f : data) {
    Vector s(f.size());
    for (Index j = 0; j < f.size(); ++j) {
      const Index i0 = j % 8, i1 = (j / 8) % 8, i2 = j / 64;
      s(((i0 + 1) % 8) + 8 * (((i1 + 2) % 8) + 8 * ((i2 + 3) % 8))) = f(j);
    }
    shifted.push_back(s);
  }
  const StrichartzResult c = strichartz_ratio(free, pair, shifted, tg);
  for (std::size_t k = 0; k < data.size(); ++k)
    CHECK(c.wave_ratios[k] == doctest::Approx(a.wave_ratios[k]).epsilon(1e-12));
}

TEST_CASE("Strichartz ratio rejects bad input") {
  const GridModel g = grid(3, 8, 2 * kPi);
  const FourierMultiplier free = laplacian_multiplier(g, LaplacianScheme::finite_difference);
  const TimeGrid tg{1.0, 0.25, 0.0};
  const AdmissiblePair pair{3, 4.0, 4.0};
  CHECK_THROWS_AS(strichartz_ratio(free, pair, {Vector::Zero(g.size())}, tg), ValidationError);
  CHECK_THROWS_AS(strichartz_ratio(free, pair, {Vector::Ones(g.size())}, tg), ValidationError);
  CHECK_THROWS_AS(strichartz_ratio(free, pair, {}, tg), ConfigError);
  CHECK_THROWS_AS(strichartz_ratio(free, AdmissiblePair{3, 3.0, 4.0}, {plane_wave(g)}, tg), ConfigError);
  CHECK_THROWS_AS(strichartz_ratio(free, pair, {plane_wave(g)}, TimeGrid{0.0, 0.25, 0.0}), ConfigError);
}
