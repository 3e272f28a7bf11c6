#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pcurve/binning.hpp"

namespace pcurve {

enum class PValueOrigin { reported_p, converted_from_t };

// Observed p-values plus the metadata the pipeline transforms need.
// cluster_id and rounding_digits are either empty or sized like values;
// rounding_digits uses -1 for "not rounded".
struct PValueSample {
  std::vector<double> values;
  std::vector<std::string> cluster_id;
  std::vector<PValueOrigin> origin;
  std::vector<int> rounding_digits;

  std::size_t size() const { return values.size(); }
  bool has_clusters() const { return !cluster_id.empty(); }
  bool has_rounding() const { return !rounding_digits.empty(); }

  // values in (0,1] (0 allowed only when marked rounded), metadata all-or-none
  void validate() const;
};

// two-sided conversion 2(1 - Phi(|t|))
double t_to_p(double t);

// adds U[u_lo, 0.5] * 10^-k to each observation marked rounded, u_lo = 0 for
// reported zeros and -0.5 otherwise; clamps into (0,1]
PValueSample deround(const PValueSample& sample, std::uint64_t seed);

// keeps exactly one uniformly chosen observation per cluster
PValueSample cluster_subsample(const PValueSample& sample, std::uint64_t seed);

struct Proportions {
  std::vector<long> counts;    // per bin, inside (0, alpha]
  Eigen::VectorXd pi_hat;      // length J
  Eigen::VectorXd pi_hat_core; // first J-1 entries
  Eigen::MatrixXd omega_hat;   // (J-1)x(J-1); empty when a core bin is empty
  long n_effective = 0;        // observations inside (0, alpha]
  long n_total = 0;
  double G_alpha_hat = 0.0;    // n_effective / n_total
};

Proportions histogram_proportions(const PValueSample& sample,
                                  const BinningScheme& binning);

// diag(pi_core) - pi_core pi_core'; ridge adds eps = 1e-10 tr/(J-1) on the
// diagonal instead of erroring on empty bins
Eigen::MatrixXd multinomial_covariance(const Proportions& prop,
                                       bool ridge = false);

Eigen::MatrixXd cluster_robust_covariance(const PValueSample& sample,
                                          const BinningScheme& binning);

// right-continuous step function (empirical CDF)
struct StepFunction {
  std::vector<double> x; // sorted unique jump locations
  std::vector<double> y; // value at and to the right of x[i]

  double operator()(double t) const;
  double left_limit(double t) const;
};

StepFunction empirical_cdf(const PValueSample& sample);
StepFunction empirical_cdf(const std::vector<double>& values);

} // namespace pcurve
