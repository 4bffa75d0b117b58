#pragma once

// Reference computations kept independent of the library's numerics.

#include <cmath>
#include <functional>

namespace oracle {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

/// Adaptive Simpson on a finite interval.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double eps = 1e-12, int depth = 50) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, eps, depth);
}

/// Root of f on [lo, hi] by plain bisection; f(lo), f(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iterations = 200) {
  double flo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Upper standard normal quantile z with P(Z > z) = p, from std::erfc.
inline double normal_upper_quantile(double p) {
  return bisect([p](double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)) - p; }, -40.0, 40.0);
}

// High-precision reference values (30 significant digits).
inline constexpr double kGammaMinus06 = -3.6969325729294803717650900365;
inline constexpr double kCXi125 = 0.71261260424132755612729324081579;
inline constexpr double kCXi15 = 0.441659687571362489328;
inline constexpr double kCXi175 = 0.207093056215584121913;
inline constexpr double kCXi25 = -0.362301631200370773189;
inline constexpr double kCXi3 = -0.684463405979725727011;
inline constexpr double kNormalQuantile0999 = 3.0902323061678135415403998301;
inline constexpr double kBeta75_5 = 3.2818619438622130774506598978e-4;
inline constexpr double kNormalCdf1959963985 = 0.97500000002688156229917887499;
inline constexpr double kGandHCrossover = 0.99959126485749004304036056887;

}  // namespace oracle
