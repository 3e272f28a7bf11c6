#pragma once

#include <vector>

#include "pcurve/binning.hpp"
#include "pcurve/null_model.hpp"

namespace pcurve {

// Polynomials A^k_j(cv), j = 0..k-1, in ascending powers of cv.  They carry
// the k-th derivative of Psi(cv_s(p), h) = exp(h*cv_s(p)) with respect to p:
//   Psi^(k) = (-1)^k h [sum_j A^k_j(cv) (cv+h)^j] / (s phi(cv))^k * exp(h cv)
struct PsiCoefficients {
  int k = 0;
  std::vector<std::vector<double>> poly;
};

// cached per k; all coefficients are nonnegative integers
const PsiCoefficients& psi_coefficients(int k);

// Psi^(k) at explicit critical value; s is the family index (1 or 2)
double psi_derivative_at(int k, double cv, double h, int s);

// Psi^(k)(cv_s(p), h) per the coefficient recursion; k >= 1
double psi_derivative(TestFamily family, double p, double h, int k);

// pointwise density bound: exp(cv_1(p)^2/2) for p <= 1/2 (one-sided, else 1);
// two-sided via the stationary point h_star(p) when cv_2(p) > 1, else 1
double bound_density(TestFamily family, double p);

// positive root of (cv-h)e^{cv h} = (cv+h)e^{-cv h} with cv = cv_2(p);
// requires cv_2(p) > 1, i.e. p < 2(1 - Phi(1))
double h_star(double p);

struct MaximizationResult {
  double value = 0.0;
  double arg = 0.0;
  bool boundary = false; // maximizer landed on the search-range edge
};

// bound on |g_s^(k)(p)|: max over h of |Psi^(k)| exp(-h^2/2) (one-sided)
// or the symmetrized two-sided analogue; grid step 1e-3 on [0, cv+10] with
// golden-section refinement
MaximizationResult bound_derivative_search(TestFamily family, double p, int k);
double bound_derivative(TestFamily family, double p, int k);

// per-bin sharp bounds on |Delta^k_j| from extremizing over point masses
struct BinBoundTable {
  TestFamily family;
  BinningScheme binning;
  int k = 0;
  std::vector<double> theta; // index j-1 holds bin j, j = 1..J-k
  double rescale = 1.0;      // 1 or 1/G_hat(alpha)
};

double sharp_bin_bound(TestFamily family, const BinningScheme& binning, int j,
                       int k);
BinBoundTable make_bin_bound_table(TestFamily family,
                                   const BinningScheme& binning, int k);
[[nodiscard]] BinBoundTable rescale_bounds(const BinBoundTable& table,
                                           double G_alpha_hat);

} // namespace pcurve
