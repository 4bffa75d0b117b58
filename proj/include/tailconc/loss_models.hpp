#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tailconc {

/// Standard Pareto on [1, inf): tail x^(-1/xi), U(t) = t^xi.
struct ParetoParams {
  double xi;
};

/// Burr: tail (1 + x^tau)^(-kappa) on [0, inf).
struct BurrParams {
  double tau;
  double kappa;
};

/// Tukey g-and-h: a + b (e^{gZ} - 1)/g e^{hZ^2/2}, Z standard normal.
struct GandHParams {
  double a;
  double b;
  double g;
  double h;
};

/// Exact Hall quantile U(t) = c t^xi (1 + d t^rho) for t >= t_min. Below
/// t_min (levels alpha < 1 - 1/t_min) the quantile rises linearly from 0 to
/// U(t_min). With the default t_min = 1 there is no linear head.
struct ExactHallParams {
  double c;
  double d;
  double xi;
  double rho;
  double t_min = 1.0;
};

enum class ModelKind { Pareto, Burr, GandH, ExactHall };

std::string to_string(ModelKind kind);

/// Tail asymptotics of a model. rho = -infinity marks the exact Pareto.
struct SecondOrderInfo {
  double xi = 0.0;
  double rho = 0.0;
  std::optional<double> hall_c;
  std::optional<double> hall_d;
  bool mean_finite = false;
};

/// Uniform variate on the open interval (0, 1) from 53 random bits.
inline double open_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// An immutable, validated univariate loss distribution.
class LossModel {
 public:
  using Params = std::variant<ParetoParams, BurrParams, GandHParams, ExactHallParams>;

  /// Throws DomainError naming the violated constraint.
  explicit LossModel(Params params);

  static LossModel pareto(double xi) { return LossModel(ParetoParams{xi}); }
  static LossModel burr(double tau, double kappa) { return LossModel(BurrParams{tau, kappa}); }
  static LossModel gandh(double a, double b, double g, double h) {
    return LossModel(GandHParams{a, b, g, h});
  }
  static LossModel exact_hall(double c, double d, double xi, double rho, double t_min = 1.0) {
    return LossModel(ExactHallParams{c, d, xi, rho, t_min});
  }

  ModelKind kind() const;
  const Params& params() const { return params_; }

  /// Lower end of the support; -infinity for g-and-h.
  double support_min() const;

  /// F^<-(alpha) for alpha in (0, 1).
  double quantile(double alpha) const;

  /// F^<-(1 - p), evaluated without forming 1 - p. Equals U(1/p).
  double upper_quantile(double p) const;

  /// Tail 1 - F(x). Total on the real line: 1 below the support.
  double tail(double x) const;

  /// F(x) = 1 - tail(x), computed directly where that is more accurate.
  double cdf(double x) const;

  /// Density f = F'. Throws DomainError outside the support.
  double density(double x) const;

  /// Truncated mean mu_F(x) = int_{-inf}^{x} t dF(t); x may be +infinity, in
  /// which case the full mean (possibly +infinity) is returned.
  double truncated_mean(double x) const;

  /// Alias of truncated_mean.
  double moments(double x) const { return truncated_mean(x); }

  /// a(t) = t U'(t) / U(t) - xi, from the analytic derivative of U.
  double auxiliary(double t) const;

  SecondOrderInfo second_order_info() const;

  /// One draw using the supplied generator.
  double draw(std::mt19937_64& rng) const;

  /// count iid draws from a private generator seeded with seed.
  std::vector<double> sample(std::uint64_t seed, std::size_t count) const;

  /// JSON model spec, e.g. {"kind":"burr","tau":0.25,"kappa":8}.
  std::string to_json() const;

 private:
  Params params_;
};

}  // namespace tailconc
