#pragma once

// Gamma-family special functions and exact binomial tails.

namespace pcurve {

double log_gamma(double x);

// Regularized incomplete gamma: P(a,x) lower, Q(a,x) upper; P + Q = 1.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Chi-squared tail probabilities, df > 0 (not necessarily integer).
double chi2_sf(double x, double df);
double chi2_cdf(double x, double df);

// P(Bin(n, 1/2) >= k), exact in log space.
double binomial_tail_geq_half(int n, int k);

// Noncentral chi-squared density, series over Poisson(lambda/2) weights,
// truncated when a term drops below 1e-16 of the running sum.
double noncentral_chi2_pdf(double x, double d, double lambda);

double chi2_pdf(double x, double d);

// d/dx of the central and noncentral densities, same series construction.
double chi2_pdf_dx(double x, double d);
double noncentral_chi2_pdf_dx(double x, double d, double lambda);

} // namespace pcurve
