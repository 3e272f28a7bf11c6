#pragma once

#include <functional>

namespace pcurve {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  int evaluations = 0;
};

// Adaptive Gauss-Kronrod (7,15) on a finite interval.  Subdivides the worst
// panel until the summed error estimate meets max(abs_tol, rel_tol*|value|).
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol = 1e-12,
                           double rel_tol = 1e-10, int max_panels = 2000);

} // namespace pcurve
