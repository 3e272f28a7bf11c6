#include "pcurve/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace pcurve {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogInvSqrt2Pi = -0.91893853320467274178;

// Rational minimax kernels for erf/erfc (Cody, Math. Comp. 1969).
// Coefficient tables are the standard double-precision set.
double calerf(double x, int jint) {
  static const double a[5] = {3.1611237438705656, 113.864154151050156,
                              377.485237685302021, 3209.37758913846947,
                              0.185777706184603153};
  static const double b[4] = {23.6012909523441209, 244.024637934444173,
                              1282.61652607737228, 2844.23683343917062};
  static const double c[9] = {0.564188496988670089, 8.88314979438837594,
                              66.1191906371416295,  298.635138197400131,
                              881.95222124176909,   1712.04761263407058,
                              2051.07837782607147,  1230.33935479799725,
                              2.15311535474403846e-8};
  static const double d[8] = {15.7449261107098347, 117.693950891312499,
                              537.181101862009858, 1621.38957456669019,
                              3290.79923573345963, 4362.61909014324716,
                              3439.36767414372164, 1230.33935480374942};
  static const double p[6] = {0.305326634961232344, 0.360344899949804439,
                              0.125781726111229246, 0.0160837851487422766,
                              6.58749161529837803e-4, 0.0163153871373020978};
  static const double q[5] = {2.56852019228982242, 1.87295284992346047,
                              0.527905102951428412, 0.0605183413124413191,
                              0.00233520497626869185};

  const double sqrpi = 0.56418958354775628695;
  const double thresh = 0.46875;
  const double xneg = -26.628, xbig = 26.543, xhuge = 6.71e7, xmax = 2.53e307;
  const double xinf = 1.79e308, xsmall = 1.11e-16;

  double y = std::fabs(x);
  double result;

  if (y <= thresh) {
    double ysq = (y > xsmall) ? y * y : 0.0;
    double xnum = a[4] * ysq, xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + a[i]) * ysq;
      xden = (xden + b[i]) * ysq;
    }
    result = x * (xnum + a[3]) / (xden + b[3]);
    if (jint != 0) result = 1.0 - result;
    if (jint == 2) result = std::exp(ysq) * result;
    return result;
  } else if (y <= 4.0) {
    double xnum = c[8] * y, xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + c[i]) * y;
      xden = (xden + d[i]) * y;
    }
    result = (xnum + c[7]) / (xden + d[7]);
    if (jint != 2) {
      // split exp(-y^2) to keep the argument reduction exact
      double ysq = std::trunc(y * 16.0) / 16.0;
      double del = (y - ysq) * (y + ysq);
      result = std::exp(-ysq * ysq) * std::exp(-del) * result;
    }
  } else {
    result = 0.0;
    if (y >= xbig && (jint != 2 || y >= xmax)) {
      // erfc underflows; fall through to the sign fixup
    } else if (y >= xbig && y >= xhuge) {
      result = sqrpi / y;
    } else {
      double ysq = 1.0 / (y * y);
      double xnum = p[5] * ysq, xden = ysq;
      for (int i = 0; i < 4; ++i) {
        xnum = (xnum + p[i]) * ysq;
        xden = (xden + q[i]) * ysq;
      }
      result = ysq * (xnum + p[4]) / (xden + q[4]);
      result = (sqrpi - result) / y;
      if (jint != 2) {
        double ysq2 = std::trunc(y * 16.0) / 16.0;
        double del = (y - ysq2) * (y + ysq2);
        result = std::exp(-ysq2 * ysq2) * std::exp(-del) * result;
      }
    }
  }

  if (jint == 0) {
    result = (0.5 - result) + 0.5;
    if (x < 0) result = -result;
  } else if (jint == 1) {
    if (x < 0) result = 2.0 - result;
  } else {
    if (x < 0) {
      if (x < xneg) {
        result = xinf;
      } else {
        double ysq = std::trunc(x * 16.0) / 16.0;
        double del = (x - ysq) * (x + ysq);
        double e = std::exp(ysq * ysq) * std::exp(del);
        result = (e + e) - result;
      }
    }
  }
  return result;
}

} // namespace

double erf(double x) { return calerf(x, 0); }
double erfc(double x) { return calerf(x, 1); }
double erfcx(double x) { return calerf(x, 2); }

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double log_normal_pdf(double x) { return kLogInvSqrt2Pi - 0.5 * x * x; }

double normal_cdf(double x) { return 0.5 * erfc(-x * kInvSqrt2); }

double normal_sf(double x) { return 0.5 * erfc(x * kInvSqrt2); }

// Wichura's PPND16 (AS 241): three rational branches on q = p - 1/2
// and r = sqrt(-log(min(p, 1-p))).
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: p must be in (0,1)");

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }

  double r = (q < 0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0) ? -val : val;
}

double normal_upper_quantile(double p) { return -normal_quantile(p); }

} // namespace pcurve
