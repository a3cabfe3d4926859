#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ksmooth/estimators.hpp"
#include "ksmooth/quadrature.hpp"
#include "ksmooth/random.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace ksmooth;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent evaluation of the kernel integral: mu = v^2 on [0, 1] and
// mu = 1/w^2 on [1, inf), both with adaptive Simpson, split at the near-pole.
double kernel_oracle(double theta, double sgn) {
  const std::complex<double> e1 = std::polar(1.0, theta), e2 = std::polar(1.0, 2.0 * theta);
  auto g = [&](double v) {
    return 2.0 / std::abs(v * v - e2) * std::abs(e1 + sgn * v * (e2 + 1.0) / (v * v + 1.0));
  };
  auto inner = [&](double v) { return g(v); };
  auto outer = [&](double w) { return w <= 0.0 ? 2.0 : g(1.0 / w) / (w * w); };
  const double c2 = std::cos(2.0 * theta);
  double total = 0.0;
  if (c2 > 0.0) {
    const double star = std::sqrt(std::sqrt(c2));
    total += adaptive_simpson(inner, 0.0, star, 1e-13).value + adaptive_simpson(inner, star, 1.0, 1e-13).value;
  } else {
    total += adaptive_simpson(inner, 0.0, 1.0, 1e-13).value;
  }
  return total + adaptive_simpson(outer, 0.0, 1.0, 1e-13).value;
}

}  // namespace

TEST_CASE("tanh-sinh handles an inverse square-root endpoint") {
  const QuadratureResult r = tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(std::abs(r.value - 2.0) < 1e-12);
  const QuadratureResult g = tanh_sinh([](double x) { return std::exp(-x * x); }, -3.0, 3.0);
  CHECK(std::abs(g.value - std::sqrt(kPi) * std::erf(3.0)) < 1e-13);
}

TEST_CASE("tanh-sinh on an empty or reversed interval is zero") {
  CHECK(tanh_sinh([](double) { return 1.0; }, 1.0, 1.0).value == 0.0);
  CHECK(adaptive_simpson([](double) { return 1.0; }, 2.0, 1.0).value == 0.0);
}

TEST_CASE("adaptive Simpson integrates smooth functions to tolerance") {
  const QuadratureResult r = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, kPi);
  CHECK(r.converged);
  CHECK(std::abs(r.value - 2.0) < 1e-11);
}

TEST_CASE("composite Simpson is exact on cubics and rejects even sample counts") {
  std::vector<double> s;
  const int n = 9;
  const double h = 2.0 / (n - 1);
  for (int k = 0; k < n; ++k) {
    const double x = -1.0 + k * h;
    s.push_back(x * x * x + 2.0 * x * x + 1.0);
  }
  CHECK(std::abs(composite_simpson(s, h) - (4.0 / 3.0 + 2.0)) < 1e-14);
  s.pop_back();
  CHECK_THROWS_AS(composite_simpson(s, h), ValidationError);
}

TEST_CASE("kernel integral at theta = pi/2 collapses to pi") {
  const KernelIntegralResult r = kernel_integral(kPi / 2, KernelSign::minus);
  CHECK(std::abs(r.value - kPi) <= 1e-7);
  CHECK(r.bound_applies);
  CHECK(r.within_bound);
}

TEST_CASE("kernel integral matches an independent quadrature") {
  for (double theta : {0.1, kPi / 4, 1.2, kPi / 2}) {
    const double oracle = kernel_oracle(theta, -1.0);
    CHECK(std::abs(kernel_integral(theta, KernelSign::minus).value - oracle) <= 1e-8 * oracle);
  }
  for (double theta : {kPi / 2 + 0.2, 3 * kPi / 4, kPi - 0.1}) {
    const double oracle = kernel_oracle(theta, 1.0);
    CHECK(std::abs(kernel_integral(theta, KernelSign::plus).value - oracle) <= 1e-8 * oracle);
  }
}

TEST_CASE("kernel integral bound on its half of the circle") {
  const KernelIntegralResult a = kernel_integral(kPi / 4, KernelSign::minus);
  CHECK(a.value <= kPi + 1e-6);
  const KernelIntegralResult b = kernel_integral(3 * kPi / 4, KernelSign::plus);
  CHECK(b.value <= kPi + 1e-6);
  CHECK(b.bound_applies);
  // The other sign is not covered by the bound and can exceed it.
  const KernelIntegralResult c = kernel_integral(3 * kPi / 4, KernelSign::minus);
  CHECK_FALSE(c.bound_applies);
  CHECK(c.value > kPi);
}

TEST_CASE("kernel integral sweep of 199 angles per sign") {
  const int count = 199;
  for (int k = 1; k <= count; ++k) {
    const double theta = 0.01 + (kPi / 2 - 0.01) * k / count;
    const KernelIntegralResult r = kernel_integral(theta, KernelSign::minus);
    CHECK(r.converged);
    CHECK(r.value <= kPi + 1e-6);
  }
  for (int k = 1; k <= count; ++k) {
    const double theta = kPi / 2 + (kPi / 2 - 0.01) * k / (count + 1);
    const KernelIntegralResult r = kernel_integral(theta, KernelSign::plus);
    CHECK(r.converged);
    CHECK(r.value <= kPi + 1e-6);
  }
}

TEST_CASE("kernel integral arguments are validated") {
  CHECK_THROWS_AS(kernel_integral(0.0, KernelSign::minus), DomainError);
  CHECK_THROWS_AS(kernel_integral(kPi, KernelSign::plus), DomainError);
  KernelQuadratureSpec finite;
  finite.mu_cutoff = 1e6;  // tail 2e-3 exceeds 1e-8
  CHECK_THROWS_AS(kernel_integral(1.0, KernelSign::minus, finite), ConfigError);
  finite.mu_cutoff = 1e17;
  CHECK(finite.tail_bound() <= 1e-8);
  CHECK_NOTHROW(kernel_integral(1.0, KernelSign::minus, finite));
}

TEST_CASE("kernel integral with adaptive Simpson agrees with tanh-sinh") {
  KernelQuadratureSpec s;
  s.scheme = QuadratureScheme::adaptive_simpson;
  s.tolerance = 1e-11;
  s.max_evaluations = 400000;
  for (double theta : {0.3, 1.0}) {
    const double a = kernel_integral(theta, KernelSign::minus).value;
    CHECK(std::abs(kernel_integral(theta, KernelSign::minus, s).value - a) <= 1e-8);
  }
}

TEST_CASE("modulus identities") {
  const auto [a, b] = modulus_identity_check(1.0, kPi / 2);
  CHECK(a <= 1e-15);
  CHECK(b <= 1e-15);
  for (double theta : {0.0, 0.7, 2.0, -1.0}) {
    const auto [c, d] = modulus_identity_check(0.0, theta);
    CHECK(c <= 1e-15);
    CHECK(d <= 1e-15);
  }
  Rng rng(5, "modulus");
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double mu = std::pow(10.0, rng.uniform(-4.0, 4.0));
    const auto [x, y] = modulus_identity_check(mu, rng.uniform(0.0, 2.0 * kPi));
    worst = std::max({worst, x, y});
  }
  CHECK(worst <= 1e-11);
}
