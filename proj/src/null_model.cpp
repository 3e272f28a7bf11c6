#include "pcurve/null_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "pcurve/bounds.hpp"
#include "pcurve/normal.hpp"
#include "pcurve/special.hpp"

namespace pcurve {

namespace {

// exp(h cv - h^2/2); the exponent is assembled before exponentiation so only
// the overall magnitude, never an intermediate factor, can overflow
double kernel(int s, double cv, double h) {
  if (s == 1) return std::exp(h * cv - 0.5 * h * h);
  return 0.5 *
         (std::exp(h * cv - 0.5 * h * h) + std::exp(-h * cv - 0.5 * h * h));
}

// closed Gaussian integral of exp(h c - h^2/2) against N(mu, sigma^2)
double normal_kernel_integral(double c, double mu, double sigma) {
  double r2 = 1.0 + sigma * sigma;
  return std::exp((sigma * sigma * c * c + 2.0 * mu * c - mu * mu) /
                  (2.0 * r2)) /
         std::sqrt(r2);
}

// rejection rate without the one-sided h >= 0 precondition (used internally
// for signed effect distributions)
double power_unchecked(int s, double cv, double h) {
  if (s == 1) return normal_sf(cv - h);
  return normal_sf(cv - h) + normal_sf(cv + h);
}

double require_converged(const QuadratureResult& r, const char* what) {
  if (!r.converged) {
    std::ostringstream ss;
    ss << what << ": quadrature did not converge, achieved error estimate "
       << r.error_estimate;
    throw std::runtime_error(ss.str());
  }
  return r.value;
}

double density_raw(TestFamily fam, const EffectDistribution& e, double cv) {
  const int s = family_index(fam);
  switch (e.kind()) {
    case EffectKind::point_mass:
      return kernel(s, cv, e.atom());
    case EffectKind::discrete: {
      double acc = 0.0;
      for (std::size_t i = 0; i < e.atoms().size(); ++i)
        acc += e.weights()[i] * kernel(s, cv, e.atoms()[i]);
      return acc;
    }
    case EffectKind::normal:
      if (s == 1) return normal_kernel_integral(cv, e.mu(), e.sigma());
      return 0.5 * (normal_kernel_integral(cv, e.mu(), e.sigma()) +
                    normal_kernel_integral(-cv, e.mu(), e.sigma()));
    case EffectKind::half_normal: {
      double s2 = e.sigma() * e.sigma();
      double r2 = 1.0 + s2;
      if (s == 1)
        return 2.0 / std::sqrt(r2) * std::exp(s2 * cv * cv / (2.0 * r2)) *
               normal_cdf(cv * e.sigma() / std::sqrt(r2));
      // the two-sided kernel is even in h, so half-normal matches N(0, s2)
      return normal_kernel_integral(cv, 0.0, e.sigma());
    }
    case EffectKind::mixture: {
      double acc = 0.0;
      for (std::size_t i = 0; i < e.components().size(); ++i)
        acc += e.weights()[i] * density_raw(fam, e.components()[i], cv);
      return acc;
    }
  }
  return 0.0;
}

double cdf_raw(TestFamily fam, const EffectDistribution& e, double p) {
  const int s = family_index(fam);
  const double cv = critical_value(fam, p);
  switch (e.kind()) {
    case EffectKind::point_mass:
      return power_unchecked(s, cv, e.atom());
    case EffectKind::discrete: {
      double acc = 0.0;
      for (std::size_t i = 0; i < e.atoms().size(); ++i)
        acc += e.weights()[i] * power_unchecked(s, cv, e.atoms()[i]);
      return acc;
    }
    case EffectKind::normal: {
      double rt = std::sqrt(1.0 + e.sigma() * e.sigma());
      if (s == 1) return normal_cdf((e.mu() - cv) / rt);
      return normal_cdf((e.mu() - cv) / rt) + normal_cdf((-e.mu() - cv) / rt);
    }
    case EffectKind::half_normal: {
      if (s == 2) {
        // even integrand again: matches N(0, sigma^2)
        double rt = std::sqrt(1.0 + e.sigma() * e.sigma());
        return 2.0 * normal_cdf(-cv / rt);
      }
      auto r = e.expectation(
          [&](double h) { return power_unchecked(1, cv, h); });
      return require_converged(r, "pcurve_cdf");
    }
    case EffectKind::mixture: {
      double acc = 0.0;
      for (std::size_t i = 0; i < e.components().size(); ++i)
        acc += e.weights()[i] * cdf_raw(fam, e.components()[i], p);
      return acc;
    }
  }
  return 0.0;
}

void check_in_interval(const PCurveSpec& spec, double p) {
  double hi = spec.alpha ? *spec.alpha : 1.0;
  if (!(p > 0.0) || p > hi || p >= 1.0)
    throw std::domain_error("p outside the spec interval");
}

} // namespace

double critical_value(TestFamily family, double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("critical_value: p in (0,1) required");
  return family == TestFamily::one_sided_t ? normal_upper_quantile(p)
                                           : normal_upper_quantile(0.5 * p);
}

double power(TestFamily family, double p, double h) {
  if (family == TestFamily::one_sided_t && h < 0.0)
    throw std::domain_error("power: one-sided family requires h >= 0");
  double cv = critical_value(family, p);
  return power_unchecked(family_index(family), cv, h);
}

PCurveSpec::PCurveSpec(TestFamily family_, EffectDistribution effects_,
                       std::optional<double> alpha_, bool allow_signed)
    : family(family_),
      effects(std::move(effects_)),
      alpha(alpha_),
      allow_signed_effects(allow_signed) {
  if (alpha && (!(*alpha > 0.0) || *alpha > 1.0))
    throw std::invalid_argument("PCurveSpec: alpha in (0,1] required");
  if (family == TestFamily::one_sided_t && !effects.nonnegative_support() &&
      !allow_signed)
    throw std::invalid_argument(
        "PCurveSpec: one-sided family requires nonnegative effect support "
        "(set allow_signed to study non-similar families)");
}

double pcurve_density(const PCurveSpec& spec, double p) {
  check_in_interval(spec, p);
  double raw = density_raw(spec.family, spec.effects,
                           critical_value(spec.family, p));
  if (spec.alpha && *spec.alpha < 1.0)
    raw /= cdf_raw(spec.family, spec.effects, *spec.alpha);
  return raw;
}

double pcurve_cdf(const PCurveSpec& spec, double p) {
  check_in_interval(spec, p);
  double raw = cdf_raw(spec.family, spec.effects, p);
  if (spec.alpha && *spec.alpha < 1.0)
    raw /= cdf_raw(spec.family, spec.effects, *spec.alpha);
  return raw;
}

double pcurve_derivative(const PCurveSpec& spec, double p, int k) {
  if (k < 0) throw std::invalid_argument("pcurve_derivative: k >= 0 required");
  if (k == 0) return pcurve_density(spec, p);
  check_in_interval(spec, p);
  const int s = family_index(spec.family);
  const double cv = critical_value(spec.family, p);
  auto integrand = [&](double h) {
    double base = psi_derivative_at(k, cv, h, s);
    if (s == 2) base = 0.5 * (base + psi_derivative_at(k, cv, -h, 2));
    return base * std::exp(-0.5 * h * h);
  };
  double raw = require_converged(spec.effects.expectation(integrand),
                                 "pcurve_derivative");
  if (spec.alpha && *spec.alpha < 1.0)
    raw /= cdf_raw(spec.family, spec.effects, *spec.alpha);
  return raw;
}

double sufficient_condition_gap(SufficientConditionCase c, double x, double h,
                                double d) {
  switch (c) {
    case SufficientConditionCase::normal_shift: {
      double f = normal_pdf(x);
      double fp = -x * normal_pdf(x);
      double fh = normal_pdf(x - h);
      double fhp = -(x - h) * normal_pdf(x - h);
      return fhp * f - fp * fh;
    }
    case SufficientConditionCase::folded_normal: {
      if (x < 0.0 || h < 0.0)
        throw std::domain_error(
            "sufficient_condition_gap: folded_normal needs x >= 0, h >= 0");
      double f = 2.0 * normal_pdf(x);
      double fp = -2.0 * x * normal_pdf(x);
      double fh = normal_pdf(x - h) + normal_pdf(x + h);
      double fhp =
          -(x - h) * normal_pdf(x - h) - (x + h) * normal_pdf(x + h);
      return fhp * f - fp * fh;
    }
    case SufficientConditionCase::noncentral_chisq: {
      if (!(x > 0.0) || h < 0.0 || !(d > 0.0))
        throw std::domain_error(
            "sufficient_condition_gap: noncentral_chisq needs x > 0, h >= 0, "
            "d > 0");
      double f = chi2_pdf(x, d);
      double fp = chi2_pdf_dx(x, d);
      double fh = noncentral_chi2_pdf(x, d, h);
      double fhp = noncentral_chi2_pdf_dx(x, d, h);
      return fhp * f - fp * fh;
    }
  }
  throw std::invalid_argument("sufficient_condition_gap: unknown case");
}

} // namespace pcurve
