#include "pcurve/effects.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "pcurve/normal.hpp"

namespace pcurve {

namespace {
void check_weights(const std::vector<double>& w) {
  if (w.empty()) throw std::invalid_argument("weights must be nonempty");
  double s = 0.0;
  for (double x : w) {
    if (x < 0.0) throw std::invalid_argument("weights must be nonnegative");
    s += x;
  }
  if (std::fabs(s - 1.0) > 1e-12)
    throw std::invalid_argument("weights must sum to 1 within 1e-12");
}
} // namespace

EffectDistribution EffectDistribution::point_mass(double h) {
  EffectDistribution d;
  d.kind_ = EffectKind::point_mass;
  d.mu_ = h;
  return d;
}

EffectDistribution EffectDistribution::normal(double mu, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("normal: sigma > 0 required");
  EffectDistribution d;
  d.kind_ = EffectKind::normal;
  d.mu_ = mu;
  d.sigma_ = sigma;
  return d;
}

EffectDistribution EffectDistribution::half_normal(double sigma) {
  if (sigma <= 0.0)
    throw std::invalid_argument("half_normal: sigma > 0 required");
  EffectDistribution d;
  d.kind_ = EffectKind::half_normal;
  d.sigma_ = sigma;
  return d;
}

EffectDistribution EffectDistribution::discrete(std::vector<double> atoms,
                                                std::vector<double> weights) {
  if (atoms.size() != weights.size() || atoms.empty())
    throw std::invalid_argument("discrete: atoms/weights size mismatch");
  check_weights(weights);
  EffectDistribution d;
  d.kind_ = EffectKind::discrete;
  d.atoms_ = std::move(atoms);
  d.weights_ = std::move(weights);
  return d;
}

EffectDistribution EffectDistribution::mixture(
    std::vector<double> weights, std::vector<EffectDistribution> components) {
  if (components.size() != weights.size() || components.empty())
    throw std::invalid_argument("mixture: weights/components size mismatch");
  check_weights(weights);
  EffectDistribution d;
  d.kind_ = EffectKind::mixture;
  d.weights_ = std::move(weights);
  d.components_ = std::move(components);
  return d;
}

bool EffectDistribution::nonnegative_support() const {
  switch (kind_) {
    case EffectKind::point_mass:
      return mu_ >= 0.0;
    case EffectKind::normal:
      return false;
    case EffectKind::half_normal:
      return true;
    case EffectKind::discrete:
      for (double a : atoms_)
        if (a < 0.0) return false;
      return true;
    case EffectKind::mixture:
      for (const auto& c : components_)
        if (!c.nonnegative_support()) return false;
      return true;
  }
  return false;
}

QuadratureResult EffectDistribution::expectation(
    const std::function<double(double)>& f) const {
  QuadratureResult r;
  switch (kind_) {
    case EffectKind::point_mass:
      r.value = f(mu_);
      r.converged = true;
      return r;
    case EffectKind::discrete: {
      double acc = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        acc += weights_[i] * f(atoms_[i]);
      r.value = acc;
      r.converged = true;
      return r;
    }
    case EffectKind::normal: {
      auto integrand = [&](double h) {
        return f(h) * normal_pdf((h - mu_) / sigma_) / sigma_;
      };
      return integrate(integrand, mu_ - 10.0 * sigma_, mu_ + 10.0 * sigma_,
                       1e-14, 1e-10);
    }
    case EffectKind::half_normal: {
      auto integrand = [&](double h) {
        return f(h) * 2.0 * normal_pdf(h / sigma_) / sigma_;
      };
      return integrate(integrand, 0.0, 10.0 * sigma_, 1e-14, 1e-10);
    }
    case EffectKind::mixture: {
      double value = 0.0;
      double err = 0.0;
      int evals = 0;
      bool conv = true;
      for (std::size_t i = 0; i < components_.size(); ++i) {
        QuadratureResult ri = components_[i].expectation(f);
        value += weights_[i] * ri.value;
        err += weights_[i] * ri.error_estimate;
        evals += ri.evaluations;
        conv = conv && ri.converged;
      }
      r.value = value;
      r.error_estimate = err;
      r.evaluations = evals;
      r.converged = conv;
      return r;
    }
  }
  return r;
}

double EffectDistribution::sample(Rng& rng) const {
  switch (kind_) {
    case EffectKind::point_mass:
      return mu_;
    case EffectKind::normal:
      return rng.normal(mu_, sigma_);
    case EffectKind::half_normal:
      return sigma_ * std::fabs(rng.normal());
    case EffectKind::discrete:
    case EffectKind::mixture: {
      double u = rng.uniform01();
      double acc = 0.0;
      std::size_t pick = weights_.size() - 1;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        acc += weights_[i];
        if (u <= acc) {
          pick = i;
          break;
        }
      }
      return kind_ == EffectKind::discrete ? atoms_[pick]
                                           : components_[pick].sample(rng);
    }
  }
  return mu_;
}

} // namespace pcurve
