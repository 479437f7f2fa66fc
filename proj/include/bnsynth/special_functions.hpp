#pragma once

// Special functions used by the scores and the utility statistics.
// Everything here is self-contained double arithmetic; the test suite checks
// it against extended-precision reference implementations.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "bnsynth/error.hpp"

namespace bnsynth::special {

// ln Gamma(x) for x > 0. Lanczos approximation (g = 671/128, 14 terms),
// relative error below 1e-14 away from the zeros at x = 1, 2.
inline double log_gamma(double x) {
  static constexpr std::array<double, 14> cof = {
      57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
      -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
      -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
      .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
      -.261908384015814087e-4, .368991826595316234e-5};
  if (!(x > 0.0)) computation_error("log_gamma: argument must be positive");
  if (x == 1.0 || x == 2.0) return 0.0;
  double y = x;
  double tmp = x + 5.24218750000000000;
  tmp = (x + 0.5) * std::log(tmp) - tmp;
  double ser = 0.999999999999997092;
  for (double c : cof) ser += c / ++y;
  return tmp + std::log(2.5066282746310005 * ser / x);
}

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;

inline double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
inline double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

inline double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < 10000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) computation_error("gamma_p: invalid arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_fraction(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without
// cancellation in the upper tail.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) computation_error("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

// Regularized incomplete beta I_x(a, b).
inline double beta_inc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0)
    computation_error("beta_inc: invalid arguments");
  if (x == 0.0 || x == 1.0) return x;
  const double front = std::exp(log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_fraction(b, a, 1.0 - x) / b;
}

// Survival function of the chi-square distribution with `df` degrees of freedom.
inline double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Standard-normal quantile: Acklam's rational approximation followed by one
// Halley correction step against the erfc-based CDF.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) computation_error("normal_quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley step; the error term uses the tail that avoids cancellation.
  // Both branches compute CDF(x) - p.
  const double e = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// CDF of Student's t with `df` degrees of freedom.
inline double t_cdf(double t, double df) {
  if (!(df > 0.0)) computation_error("t_cdf: df must be positive");
  const double x = df / (df + t * t);
  const double tail = 0.5 * beta_inc(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

inline double t_pdf(double t, double df) {
  return std::exp(log_gamma(0.5 * (df + 1.0)) - log_gamma(0.5 * df) -
                  0.5 * std::log(df * std::numbers::pi) -
                  0.5 * (df + 1.0) * std::log1p(t * t / df));
}

// Quantile of Student's t: Newton iterations on the CDF inside a bisection
// bracket, started from the normal quantile.
inline double t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) computation_error("t_quantile: p must lie in (0, 1)");
  if (!(df > 0.0)) computation_error("t_quantile: df must be positive");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(1.0 - p, df);
  // Upper tail: solve S(t) = 1 - p with S the survival function.
  const double target = 1.0 - p;
  auto survival = [df](double t) { return 0.5 * beta_inc(0.5 * df, 0.5, df / (df + t * t)); };
  double lo = 0.0;
  double hi = 1.0;
  while (survival(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) computation_error("t_quantile: bracket search failed");
  }
  double t = std::clamp(normal_quantile(p), lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double s = survival(t);
    const double f = s - target;
    if (f > 0.0) lo = t; else hi = t;
    double next = t + f / t_pdf(t, df);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - t) <= 1e-15 * std::max(1.0, std::fabs(t))) return next;
    t = next;
  }
  return t;
}

}  // namespace bnsynth::special
