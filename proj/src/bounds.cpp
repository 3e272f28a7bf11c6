#include "pcurve/bounds.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "pcurve/normal.hpp"

namespace pcurve {

namespace {

// polynomials as ascending coefficient vectors

std::vector<double> poly_shift_up(const std::vector<double>& p) {
  std::vector<double> r(p.size() + 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) r[i + 1] = p[i];
  return r;
}

std::vector<double> poly_deriv(const std::vector<double>& p) {
  if (p.size() <= 1) return {0.0};
  std::vector<double> r(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i)
    r[i - 1] = p[i] * static_cast<double>(i);
  return r;
}

std::vector<double> poly_scale(std::vector<double> p, double c) {
  for (double& x : p) x *= c;
  return p;
}

std::vector<double> poly_add(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

double poly_eval(const std::vector<double>& p, double x) {
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

double binom_coef(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// golden-section maximization of a unimodal-near-peak objective on [a, b]
double golden_max(const std::function<double(double)>& f, double a, double b,
                  double tol) {
  const double gr = 0.61803398874989485;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

// dense grid followed by golden-section refinement around the best cell
MaximizationResult grid_refine_max(const std::function<double(double)>& f,
                                   double lo, double hi, double step) {
  int n = static_cast<int>(std::ceil((hi - lo) / step));
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i <= n; ++i) {
    double h = lo + (hi - lo) * static_cast<double>(i) / n;
    double v = f(h);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double w = (hi - lo) / n;
  double a = lo + w * (best_i > 0 ? best_i - 1 : 0);
  double b = lo + w * (best_i < n ? best_i + 1 : n);
  double arg = golden_max(f, a, b, 1e-8);
  double val = f(arg);
  if (val < best) {
    val = best;
    arg = lo + w * best_i;
  }
  MaximizationResult r;
  r.value = val;
  r.arg = arg;
  r.boundary = best_i == n;
  return r;
}

} // namespace

const PsiCoefficients& psi_coefficients(int k) {
  if (k < 1) throw std::invalid_argument("psi_coefficients: k >= 1 required");
  static std::mutex mu;
  static std::deque<PsiCoefficients> cache; // cache[i] holds order i+1
  std::lock_guard<std::mutex> lock(mu);
  if (cache.empty()) {
    PsiCoefficients base;
    base.k = 1;
    base.poly = {{1.0}};
    cache.push_back(std::move(base));
  }
  while (static_cast<int>(cache.size()) < k) {
    const PsiCoefficients& prev = cache.back();
    const int kk = prev.k;
    std::vector<std::vector<double>> B(kk + 1), C(kk + 1);
    B[0] = poly_scale(poly_shift_up(prev.poly[0]), kk - 1);
    for (int j = 1; j <= kk - 1; ++j)
      B[j] = poly_add(poly_scale(poly_shift_up(prev.poly[j]), kk - 1),
                      prev.poly[j - 1]);
    B[kk] = prev.poly[kk - 1];
    for (int j = 0; j <= kk - 2; ++j)
      C[j] = poly_add(poly_deriv(prev.poly[j]),
                      poly_scale(prev.poly[j + 1], j + 1));
    C[kk - 1] = poly_deriv(prev.poly[kk - 1]);
    C[kk] = {0.0};
    PsiCoefficients next;
    next.k = kk + 1;
    next.poly.resize(kk + 1);
    for (int j = 0; j <= kk; ++j) next.poly[j] = poly_add(B[j], C[j]);
    cache.push_back(std::move(next));
  }
  return cache[k - 1];
}

double psi_derivative_at(int k, double cv, double h, int s) {
  if (k < 1)
    throw std::invalid_argument("psi_derivative_at: k >= 1 required");
  if (s != 1 && s != 2)
    throw std::invalid_argument("psi_derivative_at: s must be 1 or 2");
  if (h == 0.0) return 0.0;
  const PsiCoefficients& c = psi_coefficients(k);
  double sum = 0.0;
  double pw = 1.0;
  for (int j = 0; j < k; ++j) {
    sum += poly_eval(c.poly[j], cv) * pw;
    pw *= cv + h;
  }
  double sgn = (k % 2 == 0) ? 1.0 : -1.0;
  // exp(h cv) / (s phi(cv))^k assembled in log space; phi(cv)^k would
  // underflow long before the ratio does
  double expo = h * cv - k * (log_normal_pdf(cv) + std::log(double(s)));
  return sgn * h * sum * std::exp(expo);
}

double psi_derivative(TestFamily family, double p, double h, int k) {
  return psi_derivative_at(k, critical_value(family, p), h,
                           family_index(family));
}

namespace {

double h_star_from_cv(double cv) {
  auto f = [cv](double h) {
    return (cv - h) * std::exp(cv * h) - (cv + h) * std::exp(-cv * h);
  };
  // h = 0 is always a root; the positive one exists iff cv > 1 and sits in
  // (0, cv) where f turns negative
  double lo = 1e-12;
  double hi = cv - 1e-12;
  if (f(lo) <= 0.0) return lo;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

void report_boundary(const char* what, double arg, double hi) {
  std::ostringstream ss;
  ss << what << ": maximizer " << arg << " hit the search boundary " << hi
     << " (grid range too small)";
  throw std::runtime_error(ss.str());
}

} // namespace

double h_star(double p) {
  double cv = critical_value(TestFamily::two_sided_t, p);
  if (!(cv > 1.0))
    throw std::domain_error(
        "h_star: requires p < 2(1 - Phi(1)) so that cv_2(p) > 1");
  return h_star_from_cv(cv);
}

double bound_density(TestFamily family, double p) {
  double cv = critical_value(family, p);
  if (family == TestFamily::one_sided_t)
    return p <= 0.5 ? std::exp(0.5 * cv * cv) : 1.0;
  if (!(cv > 1.0)) return 1.0;
  double hs = h_star_from_cv(cv);
  return 0.5 *
         (std::exp(hs * cv - 0.5 * hs * hs) + std::exp(-hs * cv - 0.5 * hs * hs));
}

MaximizationResult bound_derivative_search(TestFamily family, double p, int k) {
  if (k < 1)
    throw std::invalid_argument("bound_derivative: k >= 1 required");
  const int s = family_index(family);
  const double cv = critical_value(family, p);
  auto objective = [&](double h) {
    double v = psi_derivative_at(k, cv, h, s);
    if (s == 2) v = 0.5 * (v + psi_derivative_at(k, cv, -h, 2));
    return std::fabs(v) * std::exp(-0.5 * h * h);
  };
  // the two-sided symmetrized objective is even in h, so both families
  // search h >= 0
  double hi = std::fabs(cv) + 10.0;
  return grid_refine_max(objective, 0.0, hi, 1e-3);
}

double bound_derivative(TestFamily family, double p, int k) {
  MaximizationResult r = bound_derivative_search(family, p, k);
  if (r.boundary)
    report_boundary("bound_derivative", r.arg,
                    std::fabs(critical_value(family, p)) + 10.0);
  return r.value;
}

namespace {

// per-test power at a bin edge with the cv(0) = +inf, cv_1(1) = -inf
// conventions folded in: power(0, h) = 0 and one-sided power(1, h) = 1
double edge_power(int s, double x, double h) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double cv = s == 1 ? normal_upper_quantile(x) : normal_upper_quantile(0.5 * x);
  if (s == 1) return normal_sf(cv - h);
  return normal_sf(cv - h) + normal_sf(cv + h);
}

} // namespace

double sharp_bin_bound(TestFamily family, const BinningScheme& binning, int j,
                       int k) {
  if (k < 0) throw std::invalid_argument("sharp_bin_bound: k >= 0 required");
  if (j < 1 || j > binning.J - k)
    throw std::invalid_argument("sharp_bin_bound: need 1 <= j <= J - k");
  const int s = family_index(family);
  const auto& e = binning.edges;

  // point-mass bin mass lambda_{s,m}(h) = power(x_m, h) - power(x_{m-1}, h)
  auto lambda = [&](int m, double h) {
    return edge_power(s, e[m], h) - edge_power(s, e[m - 1], h);
  };
  auto objective = [&](double h) {
    double acc = 0.0;
    for (int i = 0; i <= k; ++i) {
      double sgn = ((i + k) % 2 == 0) ? 1.0 : -1.0;
      acc += sgn * binom_coef(k, i) * lambda(k + j - i, h);
    }
    return acc;
  };

  if (k == 0 && s == 1 && j >= 2 && e[j] < 1.0) {
    // closed form: peak at the midpoint of the two edge critical values,
    // clipped to h >= 0 where the bin mass at h = 0 is just the bin width
    double a = normal_upper_quantile(e[j - 1]);
    double b = normal_upper_quantile(e[j]);
    if (a + b < 0.0) return e[j] - e[j - 1];
    return 2.0 * normal_cdf(0.5 * (a - b)) - 1.0;
  }

  // search range keyed to the largest critical value in play
  double x_ref = e[j - 1] > 0.0 ? e[j - 1] : e[1];
  double cv_ref =
      s == 1 ? normal_upper_quantile(std::min(x_ref, 0.5))
             : normal_upper_quantile(0.5 * x_ref);
  double hi = std::fabs(cv_ref) + 10.0;
  MaximizationResult r = grid_refine_max(objective, 0.0, hi, 1e-3);
  if (j == 1) {
    // first bin: lambda_1 -> 1 while the others vanish as h -> infinity, so
    // the supremum includes the limit value 1
    return std::max(r.value, 1.0);
  }
  if (r.boundary) report_boundary("sharp_bin_bound", r.arg, hi);
  return r.value;
}

BinBoundTable make_bin_bound_table(TestFamily family,
                                   const BinningScheme& binning, int k) {
  BinBoundTable t{family, binning, k, {}, 1.0};
  t.theta.reserve(binning.J - k);
  for (int j = 1; j <= binning.J - k; ++j)
    t.theta.push_back(sharp_bin_bound(family, binning, j, k));
  return t;
}

BinBoundTable rescale_bounds(const BinBoundTable& table, double G_alpha_hat) {
  if (!(G_alpha_hat > 0.0))
    throw std::invalid_argument(
        "rescale_bounds: G_hat(alpha) must be positive (empty sample)");
  if (G_alpha_hat > 1.0)
    throw std::invalid_argument("rescale_bounds: G_hat(alpha) <= 1 required");
  BinBoundTable out = table;
  for (double& th : out.theta) th /= G_alpha_hat;
  out.rescale = table.rescale / G_alpha_hat;
  return out;
}

} // namespace pcurve
