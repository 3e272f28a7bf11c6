#pragma once

// Standard normal pdf/cdf/quantile with our own erf/erfc kernels.
// Everything downstream (critical values, power functions, simulated
// draws) goes through these, so results are bit-stable across libm
// implementations.

namespace pcurve {

double erf(double x);
double erfc(double x);
// exp(x*x) * erfc(x), usable far into the tail
double erfcx(double x);

double normal_pdf(double x);
double log_normal_pdf(double x);

// Phi(x); relative accuracy limited only by the erfc kernel
double normal_cdf(double x);
// 1 - Phi(x) without cancellation for large x
double normal_sf(double x);

// Phi^{-1}(p), p in (0,1); |relative error| < 1e-13.
// Throws std::domain_error outside (0,1).
double normal_quantile(double p);

// Phi^{-1}(1-p) evaluated as -Phi^{-1}(p); keeps precision for small p
double normal_upper_quantile(double p);

} // namespace pcurve
