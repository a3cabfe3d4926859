#include "ksmooth/quadrature.hpp"

#include "ksmooth/errors.hpp"

#include <cmath>
#include <numbers>

namespace ksmooth {

QuadratureResult tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double tolerance, int max_evaluations) {
  QuadratureResult out;
  if (!(b > a)) return out;
  const double d = 0.5 * (b - a);
  constexpr double half_pi = 0.5 * std::numbers::pi;
  constexpr double t_max = 6.5;  // weights underflow well before this

  // Contribution of nodes t = k*h for the given k range with the given stride.
  auto node = [&](double t) {
    const double u = half_pi * std::sinh(t);
    const double ch = std::cosh(u);
    const double w = half_pi * std::cosh(t) / (ch * ch);
    if (w < 1e-300) return 0.0;
    // distance to the nearest endpoint, computed without cancellation
    const double tail = 1.0 / (std::exp(2.0 * std::abs(u)) + 1.0) * 2.0;  // 1 - tanh|u|
    const double x = t >= 0 ? b - d * tail : a + d * tail;
    if (!(x > a && x < b)) return 0.0;
    ++out.evaluations;
    return d * w * f(x);
  };

  double h = 1.0;
  double sum = node(0.0);
  for (int k = 1; k * h <= t_max; ++k) sum += node(k * h) + node(-k * h);
  double estimate = h * sum;

  for (int level = 1; level < 12; ++level) {
    h *= 0.5;
    double fresh = 0.0;
    for (int k = 1; k * h <= t_max; k += 2) fresh += node(k * h) + node(-k * h);
    sum += fresh;
    const double next = h * sum;
    out.error_estimate = std::abs(next - estimate);
    estimate = next;
    if (out.error_estimate <= tolerance * std::max(1.0, std::abs(estimate))) {
      out.converged = true;
      break;
    }
    if (out.evaluations > max_evaluations) break;
  }
  out.value = estimate;
  return out;
}

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  int evaluations = 0;
  int budget;
  bool exhausted = false;

  double eval(double x) {
    ++evaluations;
    return f(x);
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth, double& err) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || evaluations > budget) {
      exhausted = true;
      err += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * tol) {
      err += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tolerance, int max_evaluations) {
  QuadratureResult out;
  if (!(b > a)) return out;
  SimpsonState st{f, 0, max_evaluations};
  const double fa = st.eval(a);
  const double fb = st.eval(b);
  const double fm = st.eval(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double err = 0.0;
  out.value = st.recurse(a, b, fa, fm, fb, whole, tolerance, 50, err);
  out.error_estimate = err;
  out.evaluations = st.evaluations;
  out.converged = !st.exhausted;
  return out;
}

double composite_simpson(std::span<const double> samples, double step) {
  const std::size_t n = samples.size();
  if (n < 3 || n % 2 == 0) throw ValidationError("composite_simpson: need an odd sample count >= 3");
  double s = samples[0] + samples[n - 1];
  for (std::size_t k = 1; k + 1 < n; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * samples[k];
  return s * step / 3.0;
}

}  // namespace ksmooth
