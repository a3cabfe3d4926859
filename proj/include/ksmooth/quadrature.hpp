#pragma once

#include <functional>
#include <span>

namespace ksmooth {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Double-exponential (tanh-sinh) rule on the finite interval (a, b). Levels
// halve the step until consecutive estimates agree to `tolerance` (relative to
// max(1, |value|)) or `max_evaluations` is exhausted. Endpoints are never
// evaluated, so integrable endpoint singularities are fine.
QuadratureResult tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double tolerance = 1e-14, int max_evaluations = 20000);

// Recursive adaptive Simpson with Richardson correction.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tolerance = 1e-12, int max_evaluations = 200000);

// Composite Simpson over equally spaced samples; samples.size() must be odd.
double composite_simpson(std::span<const double> samples, double step);

}  // namespace ksmooth
