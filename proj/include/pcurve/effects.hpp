#pragma once

#include <functional>
#include <vector>

#include "pcurve/quadrature.hpp"
#include "pcurve/rng.hpp"

namespace pcurve {

enum class EffectKind { point_mass, normal, half_normal, discrete, mixture };

// Distribution of the scaled effect h.  Immutable after construction.
class EffectDistribution {
 public:
  static EffectDistribution point_mass(double h);
  static EffectDistribution normal(double mu, double sigma);
  static EffectDistribution half_normal(double sigma);
  static EffectDistribution discrete(std::vector<double> atoms,
                                     std::vector<double> weights);
  static EffectDistribution mixture(std::vector<double> weights,
                                    std::vector<EffectDistribution> components);

  EffectKind kind() const { return kind_; }
  bool nonnegative_support() const;

  // parameters; meaningful subset depends on kind
  double atom() const { return mu_; }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<EffectDistribution>& components() const {
    return components_;
  }

  // E[f(h)] under this distribution; exact for atoms, Gauss-Kronrod for
  // continuous parts with truncation at 10 sigma
  QuadratureResult expectation(const std::function<double(double)>& f) const;

  double sample(Rng& rng) const;

 private:
  EffectDistribution() = default;
  EffectKind kind_ = EffectKind::point_mass;
  double mu_ = 0.0;
  double sigma_ = 0.0;
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<EffectDistribution> components_;
};

} // namespace pcurve
