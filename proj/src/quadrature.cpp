#include "quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "tailconc/errors.hpp"

namespace tailconc::detail {

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, unsigned max_depth) {
  QuadratureResult out;
  if (a == b) return out;
  double l1 = 0.0;
  out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, rel_tol, &out.error, &l1);
  return out;
}

double integrate_checked(const std::function<double(double)>& f, double a, double b,
                         double rel_tol, const char* what, double abs_floor) {
  // Ask the integrator for two extra digits so the a-posteriori check has
  // headroom.
  const QuadratureResult r = integrate(f, a, b, rel_tol * 1e-2);
  if (!std::isfinite(r.value) || r.error > rel_tol * std::abs(r.value) + abs_floor) {
    std::ostringstream msg;
    msg << what << ": quadrature error estimate " << r.error << " exceeds tolerance for value "
        << r.value;
    throw PrecisionError(msg.str());
  }
  return r.value;
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double rel_tol,
                 unsigned max_iter) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw PrecisionError("find_root: bracket does not contain a sign change");
  }
  std::uintmax_t iters = max_iter;
  auto tol = [rel_tol](double x, double y) {
    return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y));
  };
  const auto bracket =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (bracket.first + bracket.second);
}

}  // namespace tailconc::detail
