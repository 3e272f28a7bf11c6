#include "pcurve/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pcurve/normal.hpp"
#include "pcurve/rng.hpp"

namespace pcurve {

void PValueSample::validate() const {
  const std::size_t n = values.size();
  if (!cluster_id.empty() && cluster_id.size() != n)
    throw std::invalid_argument("sample: cluster labels must cover all rows");
  if (!origin.empty() && origin.size() != n)
    throw std::invalid_argument("sample: origin must cover all rows");
  if (!rounding_digits.empty() && rounding_digits.size() != n)
    throw std::invalid_argument("sample: rounding metadata must cover all rows");
  for (std::size_t i = 0; i < n; ++i) {
    bool rounded = !rounding_digits.empty() && rounding_digits[i] >= 0;
    if (values[i] > 1.0 || values[i] < 0.0 || (values[i] == 0.0 && !rounded))
      throw std::invalid_argument(
          "sample: values must lie in (0,1] (0 only when marked rounded)");
  }
}

double t_to_p(double t) {
  return 2.0 * normal_sf(std::fabs(t));
}

PValueSample deround(const PValueSample& sample, std::uint64_t seed) {
  PValueSample out = sample;
  if (!sample.has_rounding()) return out;
  Rng rng(seed);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    int k = out.rounding_digits[i];
    if (k < 0) continue;
    double u_lo = out.values[i] == 0.0 ? 0.0 : -0.5;
    double v = out.values[i] + rng.uniform(u_lo, 0.5) * std::pow(10.0, -k);
    if (v <= 0.0) v = std::numeric_limits<double>::min();
    if (v > 1.0) v = 1.0;
    out.values[i] = v;
    out.rounding_digits[i] = -1; // noise applied once
  }
  return out;
}

PValueSample cluster_subsample(const PValueSample& sample, std::uint64_t seed) {
  if (!sample.has_clusters())
    throw std::invalid_argument("cluster_subsample: cluster labels required");
  // group indices by label in first-appearance order for determinism
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < sample.values.size(); ++i) {
    auto it = slot.find(sample.cluster_id[i]);
    if (it == slot.end()) {
      slot.emplace(sample.cluster_id[i], groups.size());
      groups.push_back({i});
    } else {
      groups[it->second].push_back(i);
    }
  }
  Rng rng(seed);
  PValueSample out;
  for (const auto& g : groups) {
    std::size_t pick = g[rng.below(g.size())];
    out.values.push_back(sample.values[pick]);
    out.cluster_id.push_back(sample.cluster_id[pick]);
    if (!sample.origin.empty()) out.origin.push_back(sample.origin[pick]);
    if (!sample.rounding_digits.empty())
      out.rounding_digits.push_back(sample.rounding_digits[pick]);
  }
  return out;
}

Proportions histogram_proportions(const PValueSample& sample,
                                  const BinningScheme& binning) {
  const int J = binning.J;
  Proportions prop;
  prop.counts.assign(J, 0);
  prop.n_total = static_cast<long>(sample.values.size());
  for (double p : sample.values) {
    if (!(p > 0.0) || p > binning.alpha) continue;
    prop.counts[binning.bin_of(p) - 1] += 1;
    prop.n_effective += 1;
  }
  if (prop.n_effective == 0)
    throw std::invalid_argument(
        "histogram_proportions: no observations inside (0, alpha]");
  prop.G_alpha_hat =
      static_cast<double>(prop.n_effective) / static_cast<double>(prop.n_total);
  prop.pi_hat.resize(J);
  for (int j = 0; j < J; ++j)
    prop.pi_hat(j) = static_cast<double>(prop.counts[j]) /
                     static_cast<double>(prop.n_effective);
  prop.pi_hat_core = prop.pi_hat.head(J - 1);
  bool all_positive = true;
  for (int j = 0; j < J; ++j) all_positive = all_positive && prop.counts[j] > 0;
  if (all_positive) prop.omega_hat = multinomial_covariance(prop);
  return prop;
}

Eigen::MatrixXd multinomial_covariance(const Proportions& prop, bool ridge) {
  const int Jm1 = static_cast<int>(prop.pi_hat_core.size());
  if (!ridge) {
    std::ostringstream empty;
    for (int j = 0; j < static_cast<int>(prop.pi_hat.size()); ++j)
      if (prop.pi_hat(j) == 0.0) empty << (empty.tellp() > 0 ? "," : "") << (j + 1);
    if (empty.tellp() > 0)
      throw std::invalid_argument(
          "multinomial_covariance: empty bins {" + empty.str() +
          "} make Omega singular; reduce J or pass ridge=true");
  }
  Eigen::MatrixXd omega =
      Eigen::MatrixXd(prop.pi_hat_core.asDiagonal()) -
      prop.pi_hat_core * prop.pi_hat_core.transpose();
  if (ridge) {
    double eps = 1e-10 * omega.trace() / Jm1;
    if (eps <= 0.0) eps = 1e-10;
    omega += eps * Eigen::MatrixXd::Identity(Jm1, Jm1);
  }
  return omega;
}

Eigen::MatrixXd cluster_robust_covariance(const PValueSample& sample,
                                          const BinningScheme& binning) {
  if (!sample.has_clusters())
    throw std::invalid_argument(
        "cluster_robust_covariance: cluster labels required");
  Proportions prop = histogram_proportions(sample, binning);
  const int Jm1 = binning.J - 1;
  // v_c = sum over the cluster's inside observations of (z_i - pi_core)
  std::map<std::string, Eigen::VectorXd> acc;
  for (std::size_t i = 0; i < sample.values.size(); ++i) {
    double p = sample.values[i];
    if (!(p > 0.0) || p > binning.alpha) continue;
    int bin = binning.bin_of(p) - 1;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(Jm1);
    if (bin < Jm1) z(bin) = 1.0;
    auto it = acc.find(sample.cluster_id[i]);
    if (it == acc.end())
      acc.emplace(sample.cluster_id[i], z - prop.pi_hat_core);
    else
      it->second += z - prop.pi_hat_core;
  }
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(Jm1, Jm1);
  for (const auto& [label, v] : acc) omega += v * v.transpose();
  omega /= static_cast<double>(prop.n_effective);
  return omega;
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(x.begin(), x.end(), t);
  if (it == x.begin()) return 0.0;
  return y[static_cast<std::size_t>(it - x.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
  auto it = std::lower_bound(x.begin(), x.end(), t);
  if (it == x.begin()) return 0.0;
  return y[static_cast<std::size_t>(it - x.begin()) - 1];
}

StepFunction empirical_cdf(const PValueSample& sample) {
  return empirical_cdf(sample.values);
}

StepFunction empirical_cdf(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("empirical_cdf: empty sample");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  StepFunction f;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double cum = static_cast<double>(i + 1) / n;
    if (!f.x.empty() && f.x.back() == sorted[i])
      f.y.back() = cum; // duplicate: jump grows by multiplicity
    else {
      f.x.push_back(sorted[i]);
      f.y.push_back(cum);
    }
  }
  return f;
}

} // namespace pcurve
