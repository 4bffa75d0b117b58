#pragma once

namespace tailconc {

/// Gamma function on the real line minus the poles {0, -1, -2, ...}.
/// Negative arguments go through the reflection formula. Throws PoleError at
/// the poles.
double gamma(double x);

/// log Gamma(x) for x > 0.
double log_gamma(double x);

/// Beta function B(x, y) = Gamma(x)Gamma(y)/Gamma(x+y) for x, y > 0,
/// evaluated on the log scale.
double beta(double x, double y);

/// sin(pi x) with exact argument reduction.
double sin_pi(double x);

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal distribution function.
double normal_cdf(double x);

/// Standard normal upper tail 1 - Phi(x), accurate far into the right tail.
double normal_sf(double x);

/// Inverse of the standard normal distribution function on (0, 1).
/// Throws DomainError outside the open interval.
double normal_inv_cdf(double p);

}  // namespace tailconc
