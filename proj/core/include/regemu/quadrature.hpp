#pragma once

#include <functional>

namespace regemu::num {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

/// Adaptive Gauss-Kronrod 15(7) integration of f over [a, b].
/// Splits the interval with the largest local error until the summed
/// error estimate satisfies abs_tol or rel_tol, or max_subdivisions is hit.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol, double rel_tol,
                           int max_subdivisions);

}  // namespace regemu::num
