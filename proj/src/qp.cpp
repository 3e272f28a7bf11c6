#include "pcurve/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pcurve {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

QpResult solve_projection_qp(const Eigen::VectorXd& pi_hat,
                             const Eigen::MatrixXd& W,
                             const Eigen::MatrixXd& A,
                             const Eigen::VectorXd& b) {
  const int n = static_cast<int>(pi_hat.size());
  const int m = static_cast<int>(A.rows());
  if (W.rows() != n || W.cols() != n || (m > 0 && A.cols() != n) ||
      b.size() != m)
    throw std::invalid_argument("solve_projection_qp: dimension mismatch");

  Eigen::LDLT<Eigen::MatrixXd> Wf(W);
  if (Wf.info() != Eigen::Success || (Wf.vectorD().array() <= 0.0).any())
    throw std::invalid_argument(
        "solve_projection_qp: W must be positive definite");

  Eigen::VectorXd x = pi_hat; // unconstrained optimum
  std::vector<int> active;
  std::vector<double> u; // multipliers for the active rows

  QpResult res;
  const int max_iter = 50 * (m + n) + 1000;
  int it = 0;

  while (true) {
    // most violated constraint
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      double s = A.row(i).dot(x) - b(i);
      double tol = 1e-11 * (1.0 + std::fabs(b(i)));
      if (s > tol && s > worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) break; // all constraints satisfied

    double up = 0.0; // multiplier being built for constraint p
    while (true) {
      if (++it > max_iter)
        throw std::runtime_error("solve_projection_qp: iteration limit (cycling)");
      const int q = static_cast<int>(active.size());
      Eigen::VectorXd ap = A.row(p).transpose();
      Eigen::VectorXd winv_ap = Wf.solve(ap);

      // primal direction z (decrease of a_p'x in the W metric, projected on
      // the active equalities) and dual direction r
      Eigen::VectorXd z, r;
      if (q == 0) {
        z = winv_ap;
        r.resize(0);
      } else {
        Eigen::MatrixXd N(n, q);
        for (int j = 0; j < q; ++j) N.col(j) = A.row(active[j]).transpose();
        Eigen::MatrixXd B = Wf.solve(N);
        Eigen::MatrixXd S = N.transpose() * B;
        Eigen::LDLT<Eigen::MatrixXd> Sf(S);
        r = Sf.solve(B.transpose() * ap);
        z = winv_ap - B * r;
      }

      double ztap = z.dot(ap);
      bool z_zero = ztap <= 1e-13 * (1.0 + ap.squaredNorm());

      // dual step bound: first active multiplier driven to zero
      double t1 = kInf;
      int drop = -1;
      for (int j = 0; j < q; ++j) {
        if (r(j) > 1e-13) {
          double t = u[j] / r(j);
          if (t < t1 - 1e-15 || (t < t1 + 1e-15 && (drop < 0 || active[j] < active[drop]))) {
            t1 = t;
            drop = j;
          }
        }
      }
      // primal step: distance until constraint p becomes tight
      double sp = A.row(p).dot(x) - b(p);
      double t2 = z_zero ? kInf : sp / ztap;

      if (t1 == kInf && t2 == kInf)
        throw std::runtime_error(
            "solve_projection_qp: infeasible constraint system (internal error)");

      double t = std::min(t1, t2);
      if (!z_zero) x -= t * z;
      for (int j = 0; j < q; ++j) u[j] -= t * r(j);
      up += t;

      if (t == t2 && !z_zero) {
        active.push_back(p);
        u.push_back(up);
        break;
      }
      // partial step: drop the blocking constraint and retry
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }

  res.q = x;
  res.multipliers = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j < active.size(); ++j)
    res.multipliers(active[j]) = u[j];
  Eigen::VectorXd diff = x - pi_hat;
  res.objective = diff.dot(W * diff);
  res.iterations = it;

  // certificates: dual value at q(u) = pi_hat - W^{-1}A'u (1/2-scaled QP)
  if (m > 0) {
    Eigen::VectorXd Atu = A.transpose() * res.multipliers;
    Eigen::VectorXd winv_atu = Wf.solve(Atu);
    double dual = -0.5 * Atu.dot(winv_atu) +
                  res.multipliers.dot(A * pi_hat - b);
    res.duality_gap = 0.5 * res.objective - dual;
    Eigen::VectorXd stat = W * diff + Atu;
    double r_stat = stat.lpNorm<Eigen::Infinity>();
    double r_feas = 0.0;
    double r_comp = 0.0;
    Eigen::VectorXd slack = A * x - b;
    for (int i = 0; i < m; ++i) {
      r_feas = std::max(r_feas, slack(i));
      r_comp = std::max(r_comp, std::fabs(res.multipliers(i) * slack(i)));
    }
    res.kkt_residual = std::max({r_stat, r_feas, r_comp});
  }
  return res;
}

} // namespace pcurve
