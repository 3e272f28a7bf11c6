#pragma once

#include <optional>

#include "pcurve/effects.hpp"

namespace pcurve {

enum class TestFamily { one_sided_t, two_sided_t };

inline int family_index(TestFamily f) {
  return f == TestFamily::one_sided_t ? 1 : 2;
}

// cv_1(p) = Phi^{-1}(1-p), cv_2(p) = Phi^{-1}(1-p/2); throws for p outside (0,1)
double critical_value(TestFamily family, double p);

// rejection rate of a level-p test at scaled effect h; one-sided needs h >= 0
double power(TestFamily family, double p, double h);

// p-curve model: test family plus effect distribution, optionally restricted
// to (0, alpha] with densities renormalized by G_s(alpha)
struct PCurveSpec {
  TestFamily family;
  EffectDistribution effects;
  std::optional<double> alpha;
  bool allow_signed_effects = false;

  PCurveSpec(TestFamily family_, EffectDistribution effects_,
             std::optional<double> alpha_ = std::nullopt,
             bool allow_signed = false);
};

double pcurve_density(const PCurveSpec& spec, double p);
double pcurve_cdf(const PCurveSpec& spec, double p);

// k-th derivative of the density in p; k = 0 returns the density itself
double pcurve_derivative(const PCurveSpec& spec, double p, int k);

// f'_h(x)f(x) - f'(x)f_h(x) for the three likelihood families with a
// monotone-ratio sufficient condition; nonnegative on their stated domains
enum class SufficientConditionCase {
  normal_shift,
  folded_normal,
  noncentral_chisq
};
double sufficient_condition_gap(SufficientConditionCase c, double x, double h,
                                double d = 0.0);

} // namespace pcurve
