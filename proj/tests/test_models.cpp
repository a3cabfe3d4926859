#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ksmooth/config.hpp"
#include "ksmooth/models.hpp"
#include "ksmooth/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

using namespace ksmooth;

namespace {

constexpr double kPi = std::numbers::pi;

GridModel grid(int n, int N, double L, Boundary b = Boundary::periodic) {
  GridModel g;
  g.n = n;
  g.N = N;
  g.L = L;
  g.boundary = b;
  return g;
}

RealVector sorted_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Index flat_of(const GridModel& g, std::array<double, 3> x) {
  for (Index j = 0; j < g.size(); ++j) {
    const auto p = g.point(j);
    if (std::abs(p[0] - x[0]) + std::abs(p[1] - x[1]) + std::abs(p[2] - x[2]) < 1e-12) return j;
  }
  FAIL("point not on the grid");
  return -1;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW(grid(3, 16, 1.0).validate());
  CHECK_THROWS_AS(grid(4, 8, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(grid(1, 4, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(grid(1, 8, -1.0).validate(), ConfigError);
  CHECK_THROWS_AS(grid(3, 17, 1.0).validate(), ConfigError);  // 4913 > cap 4096
  CHECK(grid(1, 8, 9.0, Boundary::dirichlet).spacing() == doctest::Approx(1.0));
  CHECK(grid(1, 8, 8.0).coordinate(4) == 0.0);
}

TEST_CASE("finite-difference Laplacian matches the stencil closed form") {
  const GridModel g = grid(1, 8, 2 * kPi);
  const HermitianMatrix h = build_laplacian(g, LaplacianScheme::finite_difference);
  const double hs = g.spacing();
  std::vector<double> expect;
  for (int k = 0; k < 8; ++k) expect.push_back(4.0 / (hs * hs) * std::pow(std::sin(kPi * k / 8), 2));
  std::sort(expect.begin(), expect.end());
  const RealVector got = sorted_eigenvalues(h.entries());
  for (int k = 0; k < 8; ++k) CHECK(std::abs(got(k) - expect[static_cast<std::size_t>(k)]) <= 1e-12);

  // Dirichlet: (4/h^2) sin^2(pi (k+1) / (2 (N+1))).
  const GridModel d = grid(1, 8, 9.0, Boundary::dirichlet);
  const RealVector gd = sorted_eigenvalues(build_laplacian(d, LaplacianScheme::finite_difference).entries());
  for (int k = 0; k < 8; ++k)
    CHECK(std::abs(gd(k) - 4.0 * std::pow(std::sin(kPi * (k + 1) / 18.0), 2)) <= 1e-12);
}

TEST_CASE("spectral Laplacian on the 2 pi torus has integer-square eigenvalues") {
  const GridModel g = grid(1, 8, 2 * kPi);
  const HermitianMatrix h = build_laplacian(g, LaplacianScheme::spectral);
  const RealVector got = sorted_eigenvalues(h.entries());
  const double expect[] = {0, 1, 1, 4, 4, 9, 9, 16};
  for (int k = 0; k < 8; ++k) CHECK(std::abs(got(k) - expect[k]) <= 1e-12);
  CHECK(HermitianMatrix::relative_asymmetry(h.entries()) <= 1e-14);

  const SpectralOperator s = laplacian_multiplier(g, LaplacianScheme::spectral).spectral();
  for (int k = 0; k < 8; ++k) CHECK(std::abs(s.eigenvalues()(k) - expect[k]) <= 1e-12);
}

TEST_CASE("Fourier multiplier transforms are unitary and match the dense form") {
  Rng rng(3, "multiplier");
  for (Boundary b : {Boundary::periodic, Boundary::dirichlet}) {
    const GridModel g = grid(2, 8, 5.0, b);
    const FourierMultiplier m = laplacian_multiplier(g, LaplacianScheme::finite_difference);
    const Matrix u = m.basis();
    CHECK(max_abs(u.adjoint() * u - Matrix::Identity(g.size(), g.size())) <= 1e-12);
    const Vector v = rng.complex_gaussian(g.size());
    CHECK((m.inverse(m.forward(v)) - v).norm() <= 1e-12 * v.norm());
    CHECK((m.apply_power(v, 1.0) - m.dense() * v).norm() <= 1e-10 * v.norm());
    const Matrix fd = build_laplacian(g, LaplacianScheme::finite_difference).entries();
    CHECK(max_abs(m.dense() - fd) <= 1e-10 * max_abs(fd));
  }
}

TEST_CASE("multiplier examples") {
  const GridModel g = grid(2, 8, 2 * kPi);
  SUBCASE("|xi|^2 is the Laplacian on either lattice") {
    const Matrix spec = build_laplacian(g, LaplacianScheme::spectral).entries();
    CHECK(max_abs(multiplier(g, {SymbolKind::abs_power, 2.0, Lattice::continuum}).dense() - spec) <= 1e-11);
    CHECK(max_abs(multiplier(g, {SymbolKind::frac_laplacian, 1.0, Lattice::continuum}).dense() - spec) <= 1e-11);
    const Matrix fd = build_laplacian(g, LaplacianScheme::finite_difference).entries();
    CHECK(max_abs(multiplier(g, {SymbolKind::abs_power, 2.0, Lattice::stencil}).dense() - fd) <= 1e-11);
  }
  SUBCASE("<xi>^1 is 1 on the zero mode") {
    const FourierMultiplier m = multiplier(g, {SymbolKind::japanese, 1.0, Lattice::continuum});
    CHECK(m.symbol().minCoeff() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(symbol_value({SymbolKind::japanese, 1.0, Lattice::continuum}, 3.0) == doctest::Approx(2.0));
  }
  SUBCASE("|xi|^{1/2} applied twice is |xi|") {
    Rng rng(5, "abs-power");
    const Vector v = rng.complex_gaussian(g.size());
    const FourierMultiplier half = multiplier(g, {SymbolKind::abs_power, 0.5, Lattice::continuum});
    const FourierMultiplier one = multiplier(g, {SymbolKind::abs_power, 1.0, Lattice::continuum});
    CHECK((half.apply_power(half.apply_power(v, 1.0), 1.0) - one.apply_power(v, 1.0)).norm() <= 1e-11 * v.norm());
  }
  SUBCASE("invalid symbols") {
    CHECK_THROWS_AS(multiplier(g, {SymbolKind::abs_power, -1.0, Lattice::continuum}), ConfigError);
    const GridModel d = grid(1, 8, 1.0, Boundary::dirichlet);
    CHECK_THROWS_AS(multiplier(d, {SymbolKind::abs_power, 1.0, Lattice::continuum}), ConfigError);
    CHECK_THROWS_AS(multiplier(d, {SymbolKind::japanese, 1.0, Lattice::continuum}), ConfigError);
    CHECK_NOTHROW(multiplier(d, {SymbolKind::abs_power, 2.0, Lattice::continuum}));
  }
}

TEST_CASE("continuum and stencil frequencies") {
  const GridModel g = grid(1, 8, 2 * kPi);
  CHECK(continuum_frequency(g, 0) == 0.0);
  CHECK(continuum_frequency(g, 1) == doctest::Approx(1.0));
  CHECK(continuum_frequency(g, 4) == doctest::Approx(4.0));  // Nyquist is +N/2
  CHECK(continuum_frequency(g, 7) == doctest::Approx(-1.0));
  const double h = g.spacing();
  CHECK(stencil_symbol(g, 1) == doctest::Approx(4.0 / (h * h) * std::pow(std::sin(kPi / 8), 2)));
  // The stencil symbol approaches xi^2 for low modes on a fine grid.
  const GridModel fine = grid(1, 256, 2 * kPi);
  CHECK(std::abs(stencil_symbol(fine, 1) - 1.0) <= 1e-4);
}

TEST_CASE("weight examples") {
  SUBCASE("<x>^0 is the identity") {
    const GridModel g = grid(2, 8, 4.0);
    const RealVector w = weight_values(g, {WeightKind::japanese, 0.0, std::nullopt});
    CHECK((w.array() - 1.0).abs().maxCoeff() == 0.0);
  }
  SUBCASE("|x|^{-1} is capped at 1/r0 with r0 = h") {
    const GridModel g = grid(1, 16, 8.0);
    const RealVector w = weight_values(g, {WeightKind::homogeneous, 1.0, std::nullopt});
    CHECK(w(flat_of(g, {0.0, 0.0, 0.0})) == doctest::Approx(1.0 / g.spacing()));
    CHECK(w(flat_of(g, {2.0, 0.0, 0.0})) == doctest::Approx(0.5));
  }
  SUBCASE("<x>^{-1} at (3, 4) is 1/sqrt(26)") {
    const GridModel g = grid(2, 16, 16.0);
    const RealVector w = weight_values(g, {WeightKind::japanese, 1.0, std::nullopt});
    CHECK(w(flat_of(g, {3.0, 4.0, 0.0})) == doctest::Approx(1.0 / std::sqrt(26.0)).epsilon(1e-14));
    const FactorOperator a = build_weight(g, {WeightKind::japanese, 1.0, std::nullopt});
    CHECK(a.rows() == g.size());
    CHECK(max_abs(a.entries() - Matrix(w.cast<cplx>().asDiagonal())) == 0.0);
  }
  SUBCASE("invalid weights") {
    const GridModel g = grid(1, 16, 8.0);
    CHECK_THROWS_AS(weight_values(g, {WeightKind::homogeneous, 5.0, std::nullopt}), ConfigError);
    CHECK_THROWS_AS(weight_values(g, {WeightKind::homogeneous, 1.0, 0.1}), ConfigError);
    CHECK_THROWS_AS(weight_values(g, {WeightKind::japanese, 9.0, std::nullopt}), ConfigError);
  }
}

TEST_CASE("inverse-square model") {
  const GridModel g = grid(3, 8, 8.0);
  const Matrix fd = build_laplacian(g, LaplacianScheme::finite_difference).entries();
  SUBCASE("c = 0 is the finite-difference Laplacian") {
    const InverseSquareModel m = build_inverse_square(g, 0.0, 1.0);
    CHECK(max_abs(m.h.entries() - fd) == 0.0);
    CHECK(m.pointwise_bounds);
    CHECK(m.radial_condition);
  }
  SUBCASE("potential range and the pointwise conditions") {
    const double c = 0.2;
    const InverseSquareModel m = build_inverse_square(g, c, 1.0);
    CHECK(m.r0 == doctest::Approx(g.spacing()));
    CHECK(m.potential.maxCoeff() <= 0.0);
    CHECK(m.potential.minCoeff() >= -c / (m.r0 * m.r0) - 1e-14);
    CHECK(m.potential.minCoeff() == doctest::Approx(-c / (m.r0 * m.r0)));
    CHECK(m.pointwise_bounds);
    CHECK(m.radial_condition);
  }
  SUBCASE("bottom of the spectrum decreases with c") {
    double prev = min_eigenvalue(build_inverse_square(g, 0.0, 1.0).h);
    CHECK(std::abs(prev) <= 1e-10);
    for (double c : {0.05, 0.1, 0.2}) {
      const double now = min_eigenvalue(build_inverse_square(g, c, 1.0).h);
      CHECK(now < prev);
      prev = now;
    }
  }
  SUBCASE("coupling outside the Hardy range is rejected") {
    CHECK_THROWS_AS(build_inverse_square(g, 0.25, 1.0), ConfigError);
    CHECK_THROWS_AS(build_inverse_square(g, -0.1, 1.0), ConfigError);
    CHECK_THROWS_AS(build_inverse_square(grid(2, 8, 8.0), 0.1, 1.0), ConfigError);
    CHECK_THROWS_AS(build_inverse_square(g, 0.1, 1.0, 0.5 * g.spacing()), ConfigError);
  }
}

TEST_CASE("magnetic operator with zero fields is the finite-difference Laplacian") {
  for (int n : {1, 2, 3}) {
    const GridModel g = grid(n, 8, 5.0);
    const MagneticModel m = build_magnetic(g, sample_fields(g, "zero", "zero"));
    const Matrix fd = build_laplacian(g, LaplacianScheme::finite_difference).entries();
    CHECK(max_abs(m.h.entries() - fd) <= 1e-12 * max_abs(fd));
    CHECK_FALSE(m.decay.has_value());
  }
}

TEST_CASE("magnetic operator is gauge covariant") {
  const GridModel g = grid(2, 8, 6.0);
  const FieldSpec f = sample_fields(g, "swirl amp=0.8 width=1.5", "gaussian amp=0.5 width=1.0");
  const Matrix h0 = build_magnetic(g, f).h.entries();
  const RealVector e0 = sorted_eigenvalues(h0);
  Rng rng(9, "gauge");
  for (int trial = 0; trial < 10; ++trial) {
    RealVector chi(g.size());
    for (Index j = 0; j < chi.size(); ++j) chi(j) = rng.uniform(-kPi, kPi);
    const Matrix h1 = build_magnetic(g, gauge_shift(g, f, chi)).h.entries();
    // H_chi = G H G* with G = diag(e^{i chi}).
    const Vector gphase = (kI * chi.cast<cplx>()).array().exp();
    const Matrix conj = gphase.asDiagonal() * h0 * gphase.conjugate().asDiagonal();
    CHECK(max_abs(h1 - conj) <= 1e-12 * max_abs(h0));
    CHECK((sorted_eigenvalues(h1) - e0).cwiseAbs().maxCoeff() <= 1e-10 * max_abs(h0));
  }
}

TEST_CASE("magnetic decay check") {
  const GridModel g = grid(2, 8, 6.0);
  const DecaySpec ok{3.0, 0.5, true};
  const MagneticModel m = build_magnetic(g, sample_fields(g, "decay amp=1 eps0=0.5", "zero", ok));
  REQUIRE(m.decay.has_value());
  CHECK(m.decay->holds);
  CHECK(m.decay->worst_ratio == doctest::Approx(1.0 / 3.0));

  const DecaySpec tight{1.0, 0.5, true};
  try {
    build_magnetic(g, sample_fields(g, "decay amp=5 eps0=0.5", "zero", tight));
    FAIL("expected the decay check to fail");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("decay bound fails") != std::string::npos);
  }
  // The unchecked operator builds.
  CHECK_NOTHROW(build_magnetic(g, sample_fields(g, "decay amp=5 eps0=0.5", "zero", {1.0, 0.5, false})));
  // A gauge shift clears the flag.
  const FieldSpec shifted = gauge_shift(g, sample_fields(g, "zero", "zero", ok), RealVector::Zero(g.size()));
  CHECK_FALSE(shifted.decay.check);
}

TEST_CASE("magnetic operator and field profiles reject bad input") {
  CHECK_THROWS_AS(build_magnetic(grid(1, 8, 1.0, Boundary::dirichlet),
                                 sample_fields(grid(1, 8, 1.0, Boundary::dirichlet), "zero", "zero")),
                  ConfigError);
  const GridModel g = grid(2, 8, 6.0);
  CHECK_THROWS_AS(sample_fields(g, "vortex amp=1", "zero"), ConfigError);
  CHECK_THROWS_AS(sample_fields(g, "swirl amp=1", "zero"), ConfigError);
  CHECK_THROWS_AS(sample_fields(g, "swirl amp=1 width=0", "zero"), ConfigError);
  CHECK_THROWS_AS(sample_fields(g, "zero", "constant value=x"), ConfigError);
  CHECK_THROWS_AS(sample_fields(g, "zero", "constant value=1 extra=2"), ConfigError);
  CHECK_THROWS_AS(sample_fields(grid(1, 8, 6.0), "swirl amp=1 width=1", "zero"), ConfigError);
}

TEST_CASE("model config parsing") {
  std::istringstream good(
      "[grid]\nn = 2\nN = 12\nL = 4.5\nboundary = periodic\n"
      "[weight]\nkind = homogeneous\nexponent = 1.5\n"
      "[fields]\nA = swirl amp=0.3 width=1.0\nV = zero\nC = 2\neps0 = 0.25\ncheck_decay = true\n");
  const ModelConfig c = parse_model_config(good, "good.ini");
  CHECK(c.grid.n == 2);
  CHECK(c.grid.N == 12);
  CHECK(c.grid.L == 4.5);
  CHECK(c.weight.kind == WeightKind::homogeneous);
  CHECK(c.weight.exponent == 1.5);
  CHECK(c.a_profile == "swirl amp=0.3 width=1.0");
  CHECK(c.decay.C == 2.0);
  CHECK(c.decay.eps0 == 0.25);
  CHECK(c.decay.check);
  CHECK(c.source == "good.ini");

  auto rejects = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_model_config(in, "bad.ini"), ConfigError);
  };
  rejects("[grid]\nsize = 3\n");
  rejects("[mesh]\nn = 3\n");
  rejects("[grid]\nn = three\n");
  rejects("[grid]\nL = 1.0x\n");
  rejects("[grid]\nboundary = neumann\n");
  rejects("[grid]\nn = 5\n");
  rejects("[fields]\ncheck_decay = maybe\n");
  rejects("[grid\nn = 3\n");
  CHECK_THROWS_AS(load_model_config("/nonexistent/model.ini"), IoError);
}
