#pragma once

#include <functional>

namespace tailconc::detail {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (15/31) over [a, b]; b may be +infinity.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-12, unsigned max_depth = 18);

/// Same, but throws PrecisionError when the error estimate exceeds
/// rel_tol * |value| + abs_floor.
double integrate_checked(const std::function<double(double)>& f, double a, double b,
                         double rel_tol, const char* what, double abs_floor = 0.0);

/// Root of a monotone function on a bracket [lo, hi] with f(lo), f(hi) of
/// opposite sign (TOMS 748). Returns the midpoint of the final bracket.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol = 1e-14, unsigned max_iter = 200);

}  // namespace tailconc::detail
