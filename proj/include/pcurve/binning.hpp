#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pcurve {

// Equidistant partition 0 = x_0 < x_1 < ... < x_J = alpha of the analysis
// interval (0, alpha].  Bin j covers (x_{j-1}, x_j].
struct BinningScheme {
  int J = 0;
  double alpha = 1.0;
  std::vector<double> edges;

  BinningScheme(int J_, double alpha_) : J(J_), alpha(alpha_) {
    if (J < 2) throw std::invalid_argument("binning: J >= 2 required");
    if (!(alpha > 0.0) || alpha > 1.0)
      throw std::invalid_argument("binning: alpha in (0,1] required");
    edges.resize(J + 1);
    for (int j = 0; j <= J; ++j)
      edges[j] = alpha * static_cast<double>(j) / J;
  }

  static BinningScheme from_edges(const std::vector<double>& e) {
    if (e.size() < 3) throw std::invalid_argument("binning: need J >= 2");
    if (e.front() != 0.0)
      throw std::invalid_argument("binning: edges must start at 0");
    int J = static_cast<int>(e.size()) - 1;
    double w = e.back() / J;
    for (int j = 0; j <= J; ++j)
      if (std::fabs(e[j] - w * j) > 1e-12)
        throw std::invalid_argument("binning: edges must be equidistant");
    return BinningScheme(J, e.back());
  }

  // index of the bin containing p under the (x_{j-1}, x_j] convention,
  // 1-based; p must lie in (0, alpha]
  int bin_of(double p) const {
    if (!(p > 0.0) || p > alpha + 1e-15)
      throw std::domain_error("binning: p outside (0, alpha]");
    double w = alpha / J;
    int j = static_cast<int>(std::ceil(p / w - 1e-12));
    if (j < 1) j = 1;
    if (j > J) j = J;
    return j;
  }
};

} // namespace pcurve
