#include <Eigen/Dense>
#include <doctest.h>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "pcurve/constraints.hpp"
#include "pcurve/null_model.hpp"
#include "test_helpers.hpp"

using namespace pcurve;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
const auto one = TestFamily::one_sided_t;
const auto two = TestFamily::two_sided_t;

// population bin proportions for a p-curve restricted to (0, alpha]
VectorXd population_bins(const PCurveSpec& spec, const BinningScheme& binning) {
  VectorXd pi(binning.J);
  double prev = 0.0;
  for (int j = 1; j <= binning.J; ++j) {
    const double cur = pcurve_cdf(spec, binning.edges[static_cast<std::size_t>(j)]);
    pi[j - 1] = cur - prev;
    prev = cur;
  }
  return pi;
}
} // namespace

TEST_SUITE("constraints") {

TEST_CASE("differencing matrix stencil") {
  const MatrixXd d = differencing_matrix(4);
  REQUIRE(d.rows() == 3);
  REQUIRE(d.cols() == 4);
  VectorXd v(4);
  v << 1.0, 3.0, 6.0, 10.0;
  const VectorXd dv = d * v;
  CHECK(dv[0] == doctest::Approx(2.0));
  CHECK(dv[1] == doctest::Approx(3.0));
  CHECK(dv[2] == doctest::Approx(4.0));
}

TEST_CASE("kth difference operator") {
  const int J = 7;
  // the operator is only defined for genuine differences
  CHECK_THROWS_AS(kth_difference_operator(J, 0), std::invalid_argument);

  // rows of D^k annihilate constants and apply signed binomial weights
  for (int k = 1; k <= 3; ++k) {
    const MatrixXd dk = kth_difference_operator(J, k);
    REQUIRE(dk.rows() == J - k);
    REQUIRE(dk.cols() == J);
    CHECK((dk * VectorXd::Ones(J)).norm() == doctest::Approx(0.0));
  }

  // second difference of j^2 is constant 2; (-1)^2 keeps the sign
  VectorXd sq(J);
  for (int j = 0; j < J; ++j) sq[j] = double(j * j);
  const VectorXd d2 = kth_difference_operator(J, 2) * sq;
  for (int i = 0; i < d2.size(); ++i) CHECK(d2[i] == doctest::Approx(2.0));

  // first difference carries the (-1)^1 flip: decreasing rises
  VectorXd dec(J);
  for (int j = 0; j < J; ++j) dec[j] = -double(j);
  const VectorXd d1 = kth_difference_operator(J, 1) * dec;
  for (int i = 0; i < d1.size(); ++i) CHECK(d1[i] == doctest::Approx(1.0));

  CHECK_THROWS_AS(kth_difference_operator(3, 3), std::invalid_argument);
}

TEST_CASE("monotone system: K = 0 is elementwise nonnegativity") {
  const BinningScheme binning(5, 0.15);
  const ConstraintSystem sys = build_constraint_system(binning, 0);
  CHECK_FALSE(sys.bounds_mode);
  REQUIRE(sys.A.rows() == 5);
  REQUIRE(sys.A.cols() == 4);

  // A q <= b must mirror pi_j >= 0 after substituting pi = e_J - F q
  VectorXd q(4);
  q << 0.3, 0.25, 0.2, 0.15;
  const VectorXd slack = sys.b - sys.A * q;
  // pi = (q, 1 - sum q)
  for (int j = 0; j < 4; ++j) CHECK(slack[j] == doctest::Approx(q[j]));
  CHECK(slack[4] == doctest::Approx(1.0 - q.sum()));
}

TEST_CASE("monotone system: K >= 1 drops the level rows") {
  const BinningScheme binning(6, 0.15);
  const ConstraintSystem sys = build_constraint_system(binning, 2);
  // k = 1 gives J-1 rows, k = 2 gives J-2
  REQUIRE(sys.A.rows() == 5 + 4);
  CHECK(sys.K == 2);
  for (const auto& row : sys.provenance) {
    CHECK_FALSE(row.upper);
    CHECK(row.k >= 1);
  }

  // uniform population satisfies every row with slack >= 0
  VectorXd q = VectorXd::Constant(5, 1.0 / 6.0);
  CHECK(((sys.b - sys.A * q).array() >= -1e-12).all());

  // an increasing histogram violates a monotonicity row
  VectorXd bad(5);
  bad << 0.05, 0.1, 0.15, 0.2, 0.2;
  CHECK(((sys.b - sys.A * bad).array() < -1e-9).any());
}

TEST_CASE("two-bin monotone system degenerates to a half line") {
  const BinningScheme binning(2, 0.15);
  const ConstraintSystem sys = build_constraint_system(binning, 1);
  REQUIRE(sys.A.rows() == 1);
  REQUIRE(sys.A.cols() == 1);
  // (-1) Delta pi = pi_1 - pi_2 = q - (1 - q) = 2q - 1 >= 0
  CHECK(sys.A(0, 0) == doctest::Approx(-2.0));
  CHECK(sys.b[0] == doctest::Approx(-1.0));
}

TEST_CASE("bounds mode: block layout") {
  const BinningScheme binning(10, 0.15);
  std::vector<BinBoundTable> tables;
  for (int k = 0; k <= 2; ++k)
    tables.push_back(make_bin_bound_table(two, binning, k));
  const ConstraintSystem sys = build_constraint_system(binning, 2, tables);
  CHECK(sys.bounds_mode);
  REQUIRE(sys.A.rows() == 54); // (10+9+8) upper + (10+9+8) lower
  REQUIRE(sys.provenance.size() == 54);

  int idx = 0;
  for (int k = 0; k <= 2; ++k)
    for (int j = 1; j <= 10 - k; ++j, ++idx) {
      CHECK(sys.provenance[static_cast<std::size_t>(idx)].upper);
      CHECK(sys.provenance[static_cast<std::size_t>(idx)].k == k);
      CHECK(sys.provenance[static_cast<std::size_t>(idx)].j == j);
    }
  for (int k = 0; k <= 2; ++k)
    for (int j = 1; j <= 10 - k; ++j, ++idx) {
      CHECK_FALSE(sys.provenance[static_cast<std::size_t>(idx)].upper);
      CHECK(sys.provenance[static_cast<std::size_t>(idx)].k == k);
    }

  // upper rows carry the theta values on the right-hand side, shifted by
  // the substitution's contribution from pi_J
  for (int j = 1; j <= 10; ++j) {
    const double theta = tables[0].theta[static_cast<std::size_t>(j - 1)];
    VectorXd q = VectorXd::Constant(9, 0.1);
    const double lhs = sys.A.row(j - 1) * q;
    const double pi_j = 0.1; // uniform: every bin holds 0.1
    CHECK(lhs - sys.b[j - 1] == doctest::Approx(pi_j - theta).epsilon(1e-10));
  }
}

TEST_CASE("bounds mode: population curves are feasible") {
  const BinningScheme binning(8, 0.15);
  for (auto family : {one, two}) {
    std::vector<BinBoundTable> tables;
    for (int k = 0; k <= 2; ++k)
      tables.push_back(make_bin_bound_table(family, binning, k));

    const PCurveSpec spec(family, EffectDistribution::half_normal(1.0), 0.15);
    // renormalized tables match the interval-restricted population curve
    const double g_alpha = 1.0; // spec already renormalizes; rescale tables too
    (void)g_alpha;
    const PCurveSpec full(family, EffectDistribution::half_normal(1.0));
    const double mass = pcurve_cdf(full, 0.15);
    std::vector<BinBoundTable> scaled;
    scaled.reserve(tables.size());
    for (const auto& t : tables) scaled.push_back(rescale_bounds(t, mass));

    const ConstraintSystem sys = build_constraint_system(binning, 2, scaled);
    const VectorXd pi = population_bins(spec, binning);
    CHECK(pi.sum() == doctest::Approx(1.0));
    const VectorXd q = pi.head(7);
    CHECK(((sys.b - sys.A * q).array() >= -1e-9).all());
  }
}

TEST_CASE("tables are validated") {
  const BinningScheme binning(6, 0.15);
  std::vector<BinBoundTable> short_tables;
  short_tables.push_back(make_bin_bound_table(one, binning, 0));
  CHECK_THROWS_AS(build_constraint_system(binning, 1, short_tables),
                  std::invalid_argument);

  std::vector<BinBoundTable> wrong_order;
  wrong_order.push_back(make_bin_bound_table(one, binning, 1));
  wrong_order.push_back(make_bin_bound_table(one, binning, 0));
  CHECK_THROWS_AS(build_constraint_system(binning, 1, wrong_order),
                  std::invalid_argument);

  const BinningScheme other(5, 0.15);
  std::vector<BinBoundTable> mismatched;
  mismatched.push_back(make_bin_bound_table(one, other, 0));
  mismatched.push_back(make_bin_bound_table(one, other, 1));
  CHECK_THROWS_AS(build_constraint_system(binning, 1, mismatched),
                  std::invalid_argument);
}

TEST_CASE("json export mirrors the matrix") {
  const BinningScheme binning(4, 0.15);
  const ConstraintSystem sys = build_constraint_system(binning, 1);
  const nlohmann::json doc = nlohmann::json::parse(to_json_string(sys));
  CHECK(doc.at("J").get<int>() == 4);
  CHECK(doc.at("K").get<int>() == 1);
  CHECK(doc.at("mode").get<std::string>() == "monotonicity");
  const auto& rows = doc.at("rows");
  REQUIRE(rows.size() == static_cast<std::size_t>(sys.A.rows()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto a = rows[r].at("a").get<std::vector<double>>();
    REQUIRE(a.size() == static_cast<std::size_t>(sys.A.cols()));
    for (std::size_t c = 0; c < a.size(); ++c)
      CHECK(a[c] == doctest::Approx(sys.A(static_cast<Eigen::Index>(r),
                                          static_cast<Eigen::Index>(c))));
    CHECK(rows[r].at("b").get<double>() == doctest::Approx(sys.b[static_cast<Eigen::Index>(r)]));
  }
}

} // TEST_SUITE
