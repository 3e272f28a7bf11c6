#pragma once

#include <Eigen/Dense>

namespace pcurve {

struct QpResult {
  Eigen::VectorXd q;           // argmin
  Eigen::VectorXd multipliers; // per constraint row, 0 when inactive
  double objective = 0.0;      // (q - pi_hat)' W (q - pi_hat)
  double duality_gap = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

// min (q - pi_hat)' W (q - pi_hat) subject to A q <= b, W symmetric positive
// definite.  Dual active-set: starts from the unconstrained optimum and adds
// violated constraints, so no feasible start is needed.
QpResult solve_projection_qp(const Eigen::VectorXd& pi_hat,
                             const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& A,
                             const Eigen::VectorXd& b);

} // namespace pcurve
