#include "tailconc/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tailconc/errors.hpp"

namespace tailconc {
namespace {

// Lanczos approximation with g = 607/128 and 14 terms; close to full double
// precision for x > 0.
constexpr double kLanczosG = 671.0 / 128.0;  // g + 1/2
constexpr double kLanczosSeries0 = 0.999999999999997092;
constexpr std::array<double, 14> kLanczosCoef = {
    57.1562356658629235,     -59.5979603554754912,     14.1360979747417471,
    -0.491913816097620199,   .339946499848118887e-4,   .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,   -.210264441724104883e-3,
    .217439618115212643e-3,  -.164318106536763890e-3,  .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};
constexpr double kSqrtTwoPi = 2.5066282746310005024;

double lanczos_series(double x) {
  double ser = kLanczosSeries0;
  double y = x;
  for (double c : kLanczosCoef) ser += c / ++y;
  return ser;
}

// Gamma for x > 0.
double gamma_positive(double x) {
  const double t = x + kLanczosG;
  const double prefactor = kSqrtTwoPi * lanczos_series(x) / x;
  // t^(x+1/2) e^-t, split to postpone overflow.
  const double half = std::pow(t, 0.5 * (x + 0.5));
  return prefactor * half * (half * std::exp(-t));
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace

double sin_pi(double x) {
  if (!std::isfinite(x)) return std::numeric_limits<double>::quiet_NaN();
  // r in [-1, 1], exact.
  double r = x - 2.0 * std::nearbyint(0.5 * x);
  if (r > 0.5) {
    r = 1.0 - r;
  } else if (r < -0.5) {
    r = -1.0 - r;
  }
  if (r == 0.0) return 0.0;
  return std::sin(std::numbers::pi * r);
}

double gamma(double x) {
  if (std::isnan(x)) return x;
  if (is_nonpositive_integer(x)) {
    std::ostringstream msg;
    msg << "gamma: pole at non-positive integer x = " << x;
    throw PoleError(msg.str());
  }
  if (x > 0.0) return gamma_positive(x);
  // Gamma(x) Gamma(1-x) = pi / sin(pi x)
  return std::numbers::pi / (sin_pi(x) * gamma_positive(1.0 - x));
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: requires x > 0");
  if (x < 16.0) return std::log(gamma_positive(x));
  const double t = x + kLanczosG;
  return (x + 0.5) * std::log(t) - t + std::log(kSqrtTwoPi * lanczos_series(x) / x);
}

double beta(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) {
    throw DomainError("beta: requires x > 0 and y > 0");
  }
  return std::exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y));
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / kSqrtTwoPi;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_sf(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double normal_inv_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "normal_inv_cdf: p = " << p << " outside (0, 1)";
    throw DomainError(msg.str());
  }

  // Wichura, AS241 (PPND16).
  static constexpr double a[] = {
      3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3};
  static constexpr double b[] = {
      1.0,                     4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4, 5.2264952788528545610e3};
  static constexpr double c[] = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {
      1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr double e[] = {
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {
      1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  auto horner = [](const double* coef, double r) {
    double s = coef[7];
    for (int i = 6; i >= 0; --i) s = s * r + coef[i];
    return s;
  };

  const double q = p - 0.5;
  double x;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q * horner(a, r) / horner(b, r);
  } else {
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    if (r <= 5.0) {
      r -= 1.6;
      x = horner(c, r) / horner(d, r);
    } else {
      r -= 5.0;
      x = horner(e, r) / horner(f, r);
    }
    if (q < 0.0) x = -x;
  }

  // One Halley step on Phi(x) - p. For p > 1/2 the residual is formed from
  // the upper tail, where 1 - p is exact.
  const double resid = (p <= 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
  const double u = resid / normal_pdf(x);
  if (std::isfinite(u)) x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace tailconc
