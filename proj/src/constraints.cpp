#include "pcurve/constraints.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pcurve {

Eigen::MatrixXd differencing_matrix(int m) {
  if (m < 2) throw std::invalid_argument("differencing_matrix: m >= 2");
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m - 1, m);
  for (int i = 0; i < m - 1; ++i) {
    D(i, i) = -1.0;
    D(i, i + 1) = 1.0;
  }
  return D;
}

Eigen::MatrixXd kth_difference_operator(int J, int k) {
  if (k < 1 || k > J - 1)
    throw std::invalid_argument(
        "kth_difference_operator: 1 <= k <= J-1 required");
  Eigen::MatrixXd D = differencing_matrix(J);
  for (int m = J - 1; m >= J - k + 1; --m) D = differencing_matrix(m) * D;
  if (k % 2 == 1) D = -D;
  return D;
}

namespace {

// pi = e_J - F q substitution pieces
Eigen::MatrixXd substitution_F(int J) {
  Eigen::MatrixXd F(J, J - 1);
  F.topRows(J - 1) = -Eigen::MatrixXd::Identity(J - 1, J - 1);
  F.bottomRows(1) = Eigen::MatrixXd::Ones(1, J - 1);
  return F;
}

Eigen::VectorXd basis_eJ(int J) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(J);
  e(J - 1) = 1.0;
  return e;
}

// appends the block for order k: M pi = (-1)^k Delta^k (M = I for k = 0).
// upper rows encode M pi <= theta, lower rows 0 <= M pi; with the
// substitution these become -MF q <= theta -M e_J and MF q <= M e_J.
void append_block(ConstraintSystem& sys, const Eigen::MatrixXd& M, int k,
                  bool upper, const std::vector<double>* theta,
                  std::vector<Eigen::RowVectorXd>& rows,
                  std::vector<double>& rhs) {
  const int J = sys.J;
  Eigen::MatrixXd MF = M * substitution_F(J);
  Eigen::VectorXd Me = M * basis_eJ(J);
  for (int r = 0; r < M.rows(); ++r) {
    if (upper) {
      rows.push_back(-MF.row(r));
      rhs.push_back((*theta)[r] - Me(r));
    } else {
      rows.push_back(MF.row(r));
      rhs.push_back(Me(r));
    }
    sys.provenance.push_back(ConstraintRow{k, upper, r + 1});
  }
}

ConstraintSystem assemble(const BinningScheme& binning, int K,
                          const std::vector<BinBoundTable>* tables) {
  const int J = binning.J;
  if (K < 0 || K >= J)
    throw std::invalid_argument("build_constraint_system: 0 <= K < J required");
  if (tables) {
    if (static_cast<int>(tables->size()) != K + 1)
      throw std::invalid_argument(
          "build_constraint_system: need K+1 bound tables");
    for (int k = 0; k <= K; ++k) {
      const BinBoundTable& t = (*tables)[k];
      if (t.k != k || t.binning.J != J ||
          std::fabs(t.binning.alpha - binning.alpha) > 1e-12 ||
          static_cast<int>(t.theta.size()) != J - k)
        throw std::invalid_argument(
            "build_constraint_system: bound table misaligned with binning");
    }
  }

  ConstraintSystem sys;
  sys.J = J;
  sys.K = K;
  sys.bounds_mode = tables != nullptr;

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;

  auto order_matrix = [&](int k) -> Eigen::MatrixXd {
    return k == 0 ? Eigen::MatrixXd::Identity(J, J)
                  : kth_difference_operator(J, k);
  };

  if (tables) {
    for (int k = 0; k <= K; ++k)
      append_block(sys, order_matrix(k), k, true, &(*tables)[k].theta, rows,
                   rhs);
    for (int k = 0; k <= K; ++k)
      append_block(sys, order_matrix(k), k, false, nullptr, rows, rhs);
  } else if (K == 0) {
    append_block(sys, order_matrix(0), 0, false, nullptr, rows, rhs);
  } else {
    for (int k = 1; k <= K; ++k)
      append_block(sys, order_matrix(k), k, false, nullptr, rows, rhs);
  }

  sys.A.resize(static_cast<int>(rows.size()), J - 1);
  sys.b.resize(static_cast<int>(rhs.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    sys.A.row(static_cast<int>(r)) = rows[r];
    sys.b(static_cast<int>(r)) = rhs[r];
  }
  return sys;
}

} // namespace

ConstraintSystem build_constraint_system(const BinningScheme& binning, int K) {
  return assemble(binning, K, nullptr);
}

ConstraintSystem build_constraint_system(
    const BinningScheme& binning, int K,
    const std::vector<BinBoundTable>& bound_tables) {
  return assemble(binning, K, &bound_tables);
}

std::string to_json_string(const ConstraintSystem& sys) {
  nlohmann::ordered_json j;
  j["J"] = sys.J;
  j["K"] = sys.K;
  j["mode"] = sys.bounds_mode ? "bounds" : "monotonicity";
  j["rows"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < sys.provenance.size(); ++r) {
    const ConstraintRow& pr = sys.provenance[r];
    nlohmann::ordered_json row;
    row["k"] = pr.k;
    row["direction"] = pr.upper ? "upper" : "lower";
    row["bin"] = pr.j;
    std::vector<double> coef(sys.A.cols());
    for (int c = 0; c < sys.A.cols(); ++c)
      coef[c] = sys.A(static_cast<int>(r), c);
    row["a"] = coef;
    row["b"] = sys.b(static_cast<int>(r));
    j["rows"].push_back(row);
  }
  return j.dump(2);
}

} // namespace pcurve
