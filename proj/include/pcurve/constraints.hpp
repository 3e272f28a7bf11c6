#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pcurve/bounds.hpp"

namespace pcurve {

// where a constraint row came from: difference order k, direction, bin j
struct ConstraintRow {
  int k = 0;
  bool upper = false; // true: (-1)^k Delta^k <= theta; false: 0 <= (-1)^k Delta^k
  int j = 0;          // 1-based bin index within the block
};

// H0 as A q <= b over the core proportions q = pi_{-J}, with pi_J
// substituted out via pi = e_J - F q
struct ConstraintSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  int J = 0;
  int K = 0;
  bool bounds_mode = false;
  std::vector<ConstraintRow> provenance;
};

// (m-1) x m rows of (-1, 1) stencils
Eigen::MatrixXd differencing_matrix(int m);

// D^k = (-1)^k D_{J-k+1} ... D_J, a (J-k) x J matrix with
// D^k pi = (-1)^k Delta^k pi
Eigen::MatrixXd kth_difference_operator(int J, int k);

// monotonicity-only system: K = 0 keeps the nonnegativity rows pi_j >= 0;
// K >= 1 keeps the difference rows 0 <= (-1)^k Delta^k for k = 1..K
ConstraintSystem build_constraint_system(const BinningScheme& binning, int K);

// bounds mode: both directions for k = 0..K; bound_tables[k] supplies theta^(k)
ConstraintSystem build_constraint_system(
    const BinningScheme& binning, int K,
    const std::vector<BinBoundTable>& bound_tables);

std::string to_json_string(const ConstraintSystem& sys);

} // namespace pcurve
