#include "tailconc/loss_models.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include "json.hpp"
#include <sstream>

#include "quadrature.hpp"
#include "tailconc/errors.hpp"
#include "tailconc/special_functions.hpp"

namespace tailconc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& model, const std::string& constraint, double value) {
  if (ok) return;
  std::ostringstream msg;
  msg << model << ": parameter constraint " << constraint << " violated (got " << value << ")";
  throw DomainError(msg.str());
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream msg;
    msg << "quantile: alpha = " << alpha << " outside (0, 1)";
    throw DomainError(msg.str());
  }
}

// ---- g-and-h transform k(z) = (e^{gz} - 1)/g * e^{h z^2 / 2} -----------------

double gh_transform(const GandHParams& p, double z) {
  return std::expm1(p.g * z) / p.g * std::exp(0.5 * p.h * z * z);
}

double gh_transform_deriv(const GandHParams& p, double z) {
  const double e = std::exp(0.5 * p.h * z * z);
  return std::exp(p.g * z) * e + std::expm1(p.g * z) / p.g * e * p.h * z;
}

// Generator value z with a + b k(z) = x. |z| is capped at 40, beyond which the
// normal tail underflows.
double gh_generator(const GandHParams& p, double x) {
  const double y = (x - p.a) / p.b;
  if (y == 0.0) return 0.0;
  constexpr double kCap = 40.0;
  double lo = -1.0;
  double hi = 1.0;
  while (gh_transform(p, hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi >= kCap) {
      if (gh_transform(p, kCap) < y) return kCap;
      hi = kCap;
      break;
    }
  }
  while (gh_transform(p, lo) > y) {
    hi = lo;
    lo *= 2.0;
    if (lo <= -kCap) {
      if (gh_transform(p, -kCap) > y) return -kCap;
      lo = -kCap;
      break;
    }
  }
  // Safeguarded Newton.
  double z = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fz = gh_transform(p, z) - y;
    if (fz == 0.0) return z;
    if (fz < 0.0) {
      lo = z;
    } else {
      hi = z;
    }
    const double step = fz / gh_transform_deriv(p, z);
    double next = z - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - z) <= 2e-16 * std::max(1.0, std::abs(z)) || hi - lo <= 4e-16 * std::max(1.0, std::abs(z))) {
      return next;
    }
    z = next;
  }
  return z;
}

// ---- exact Hall ----------------------------------------------------------------

double hall_u(const ExactHallParams& p, double t) {
  return p.c * std::pow(t, p.xi) * (1.0 + p.d * std::pow(t, p.rho));
}

double hall_u_deriv(const ExactHallParams& p, double t) {
  return p.c * std::pow(t, p.xi - 1.0) * (p.xi + p.d * (p.xi + p.rho) * std::pow(t, p.rho));
}

double hall_alpha_min(const ExactHallParams& p) { return 1.0 - 1.0 / p.t_min; }

// Return period t >= t_min with U(t) = x, for x >= U(t_min).
double hall_return_period(const ExactHallParams& p, double x) {
  const double s_lo = std::log(p.t_min);
  if (x <= hall_u(p, p.t_min)) return p.t_min;
  auto f = [&](double s) { return std::log(hall_u(p, std::exp(s))) - std::log(x); };
  double s_hi = std::max(s_lo + 1.0, (std::log(x) - std::log(p.c)) / p.xi + 1.0);
  while (f(s_hi) < 0.0) s_hi = s_lo + 2.0 * (s_hi - s_lo);
  return std::exp(detail::find_root(f, s_lo, s_hi, 1e-15));
}

// int_{t0}^{t1} t^e dt, t1 may be infinite.
double power_integral(double e, double t0, double t1) {
  if (e == -1.0) return std::log(t1 / t0);
  if (std::isinf(t1)) return e < -1.0 ? -std::pow(t0, e + 1.0) / (e + 1.0) : kInf;
  return (std::pow(t1, e + 1.0) - std::pow(t0, e + 1.0)) / (e + 1.0);
}

void validate_hall(const ExactHallParams& p) {
  const std::string m = "hall";
  require(std::isfinite(p.c) && p.c > 0.0, m, "c > 0", p.c);
  require(std::isfinite(p.d) && p.d != 0.0, m, "d != 0", p.d);
  require(std::isfinite(p.xi) && p.xi > 0.0, m, "xi > 0", p.xi);
  require(std::isfinite(p.rho) && p.rho < 0.0, m, "rho < 0", p.rho);
  require(std::isfinite(p.t_min) && p.t_min >= 1.0, m, "t_min >= 1", p.t_min);
  // Positive and strictly increasing on 1000 log-spaced return periods.
  constexpr int kPoints = 1000;
  const double log_lo = std::log(p.t_min);
  const double log_hi = log_lo + std::log(1e15);
  double prev = -kInf;
  for (int i = 0; i < kPoints; ++i) {
    const double t = std::exp(log_lo + (log_hi - log_lo) * i / (kPoints - 1));
    const double u = hall_u(p, t);
    if (!(u > 0.0) || !(u > prev) || !(hall_u_deriv(p, t) > 0.0)) {
      std::ostringstream msg;
      msg << "hall: quantile c t^xi (1 + d t^rho) must be positive and strictly increasing for t >= "
             "t_min; fails at t = "
          << t << " (raise t_min)";
      throw DomainError(msg.str());
    }
    prev = u;
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Pareto: return "pareto";
    case ModelKind::Burr: return "burr";
    case ModelKind::GandH: return "gandh";
    case ModelKind::ExactHall: return "hall";
  }
  return "unknown";
}

LossModel::LossModel(Params params) : params_(params) {
  std::visit(Overloaded{
                 [](const ParetoParams& p) {
                   require(std::isfinite(p.xi) && p.xi > 0.0, "pareto", "xi > 0", p.xi);
                 },
                 [](const BurrParams& p) {
                   require(std::isfinite(p.tau) && p.tau > 0.0, "burr", "tau > 0", p.tau);
                   require(std::isfinite(p.kappa) && p.kappa > 0.0, "burr", "kappa > 0", p.kappa);
                 },
                 [](const GandHParams& p) {
                   require(std::isfinite(p.a), "gandh", "a finite", p.a);
                   require(std::isfinite(p.b) && p.b > 0.0, "gandh", "b > 0", p.b);
                   require(std::isfinite(p.g) && p.g > 0.0, "gandh", "g > 0", p.g);
                   require(std::isfinite(p.h) && p.h > 0.0, "gandh", "h > 0", p.h);
                 },
                 [](const ExactHallParams& p) { validate_hall(p); },
             },
             params_);
}

ModelKind LossModel::kind() const {
  return std::visit(Overloaded{
                        [](const ParetoParams&) { return ModelKind::Pareto; },
                        [](const BurrParams&) { return ModelKind::Burr; },
                        [](const GandHParams&) { return ModelKind::GandH; },
                        [](const ExactHallParams&) { return ModelKind::ExactHall; },
                    },
                    params_);
}

double LossModel::support_min() const {
  return std::visit(Overloaded{
                        [](const ParetoParams&) { return 1.0; },
                        [](const BurrParams&) { return 0.0; },
                        [](const GandHParams&) { return -kInf; },
                        [](const ExactHallParams& p) {
                          return p.t_min > 1.0 ? 0.0 : hall_u(p, 1.0);
                        },
                    },
                    params_);
}

double LossModel::quantile(double alpha) const {
  require_alpha(alpha);
  return std::visit(
      Overloaded{
          [&](const ParetoParams& p) { return std::exp(-p.xi * std::log1p(-alpha)); },
          [&](const BurrParams& p) {
            return std::pow(std::expm1(-std::log1p(-alpha) / p.kappa), 1.0 / p.tau);
          },
          [&](const GandHParams& p) { return p.a + p.b * gh_transform(p, normal_inv_cdf(alpha)); },
          [&](const ExactHallParams& p) {
            const double amin = hall_alpha_min(p);
            if (alpha < amin) return hall_u(p, p.t_min) * alpha / amin;
            return hall_u(p, 1.0 / (1.0 - alpha));
          },
      },
      params_);
}

double LossModel::upper_quantile(double prob) const {
  require_alpha(prob);
  return std::visit(Overloaded{
                        [&](const ParetoParams& p) { return std::pow(prob, -p.xi); },
                        [&](const BurrParams& p) {
                          return std::pow(std::expm1(-std::log(prob) / p.kappa), 1.0 / p.tau);
                        },
                        [&](const GandHParams& p) {
                          return p.a + p.b * gh_transform(p, -normal_inv_cdf(prob));
                        },
                        [&](const ExactHallParams& p) {
                          const double t = 1.0 / prob;
                          if (t < p.t_min) {
                            return hall_u(p, p.t_min) * (1.0 - prob) / hall_alpha_min(p);
                          }
                          return hall_u(p, t);
                        },
                    },
                    params_);
}

double LossModel::tail(double x) const {
  if (std::isnan(x)) throw DomainError("tail: x is NaN");
  return std::visit(Overloaded{
                        [&](const ParetoParams& p) {
                          return x <= 1.0 ? 1.0 : std::exp(-std::log(x) / p.xi);
                        },
                        [&](const BurrParams& p) {
                          return x <= 0.0 ? 1.0
                                          : std::exp(-p.kappa * std::log1p(std::pow(x, p.tau)));
                        },
                        [&](const GandHParams& p) {
                          if (x == kInf) return 0.0;
                          if (x == -kInf) return 1.0;
                          return normal_sf(gh_generator(p, x));
                        },
                        [&](const ExactHallParams& p) {
                          if (x <= support_min()) return 1.0;
                          if (x == kInf) return 0.0;
                          const double umin = hall_u(p, p.t_min);
                          if (x < umin) return 1.0 - hall_alpha_min(p) * x / umin;
                          return 1.0 / hall_return_period(p, x);
                        },
                    },
                    params_);
}

double LossModel::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("cdf: x is NaN");
  return std::visit(
      Overloaded{
          [&](const ParetoParams& p) {
            return x <= 1.0 ? 0.0 : -std::expm1(-std::log(x) / p.xi);
          },
          [&](const BurrParams& p) {
            return x <= 0.0 ? 0.0 : -std::expm1(-p.kappa * std::log1p(std::pow(x, p.tau)));
          },
          [&](const GandHParams& p) {
            if (x == kInf) return 1.0;
            if (x == -kInf) return 0.0;
            return normal_cdf(gh_generator(p, x));
          },
          [&](const ExactHallParams& p) {
            if (x <= support_min()) return 0.0;
            if (x == kInf) return 1.0;
            const double umin = hall_u(p, p.t_min);
            if (x < umin) return hall_alpha_min(p) * x / umin;
            return 1.0 - 1.0 / hall_return_period(p, x);
          },
      },
      params_);
}

double LossModel::density(double x) const {
  auto outside = [&]() {
    std::ostringstream msg;
    msg << "density: x = " << x << " outside the support of " << to_string(kind());
    return DomainError(msg.str());
  };
  if (!std::isfinite(x) || x < support_min()) throw outside();
  return std::visit(
      Overloaded{
          [&](const ParetoParams& p) { return std::pow(x, -1.0 / p.xi - 1.0) / p.xi; },
          [&](const BurrParams& p) {
            const double xt = std::pow(x, p.tau);
            return p.kappa * p.tau * std::pow(x, p.tau - 1.0) *
                   std::exp(-(p.kappa + 1.0) * std::log1p(xt));
          },
          [&](const GandHParams& p) {
            const double z = gh_generator(p, x);
            return normal_pdf(z) / (p.b * gh_transform_deriv(p, z));
          },
          [&](const ExactHallParams& p) {
            const double umin = hall_u(p, p.t_min);
            if (x < umin) return hall_alpha_min(p) / umin;
            const double t = hall_return_period(p, x);
            return 1.0 / (t * t * hall_u_deriv(p, t));
          },
      },
      params_);
}

double LossModel::truncated_mean(double x) const {
  if (std::isnan(x)) throw DomainError("truncated_mean: x is NaN");
  const SecondOrderInfo info = second_order_info();
  if (x == kInf && !info.mean_finite) return kInf;
  if (x <= support_min()) return 0.0;

  return std::visit(
      Overloaded{
          [&](const ParetoParams& p) {
            if (x == kInf) return 1.0 / (1.0 - p.xi);
            const double lx = std::log(x);
            if (p.xi == 1.0) return lx;
            const double e = 1.0 - 1.0 / p.xi;
            return std::expm1(e * lx) / (p.xi * e);
          },
          [&](const BurrParams& p) {
            if (x == kInf) return p.kappa * beta(p.kappa - 1.0 / p.tau, 1.0 + 1.0 / p.tau);
            // With W = x^tau / (1 + x^tau) ~ Beta(1, kappa) the truncated mean is
            // kappa B_w(1 + 1/tau, kappa - 1/tau).
            const double a = 1.0 + 1.0 / p.tau;
            const double b = p.kappa - 1.0 / p.tau;
            const double y = std::pow(x, p.tau);
            if (b > 0.0) return p.kappa * boost::math::beta(a, b, y / (1.0 + y));
            // Infinite mean: integrate kappa e^{-kappa v} (e^v - 1)^{1/tau} over
            // v in [0, log(1 + x^tau)].
            boost::math::quadrature::tanh_sinh<double> ts;
            double err = 0.0;
            const double total = ts.integrate(
                [&](double v) { return p.kappa * std::exp(-p.kappa * v + std::log(std::expm1(v)) / p.tau); },
                0.0, std::log1p(y), 1e-12, &err);
            if (!(err <= 1e-10 * std::abs(total))) {
              throw PrecisionError("burr truncated mean: quadrature did not converge");
            }
            return total;
          },
          [&](const GandHParams& p) {
            if (p.h >= 1.0) {
              throw DomainError("truncated_mean: g-and-h with h >= 1 has a non-integrable left tail");
            }
            // int_{-inf}^{z(x)} (a + b k(z)) phi(z) dz
            const double zx = (x == kInf) ? kInf : gh_generator(p, x);
            auto integrand = [&](double z) {
              const double e = 0.5 * (p.h - 1.0) * z * z;
              const double k_phi = (std::exp(p.g * z + e) - std::exp(e)) / p.g /
                                   std::sqrt(2.0 * std::numbers::pi);
              return p.a * normal_pdf(z) + p.b * k_phi;
            };
            const double split = std::min(0.0, zx);
            double total = detail::integrate(integrand, -kInf, split, kQuadTol).value;
            if (zx > 0.0) total += detail::integrate(integrand, 0.0, zx, kQuadTol).value;
            return total;
          },
          [&](const ExactHallParams& p) {
            const double umin = hall_u(p, p.t_min);
            const double amin = hall_alpha_min(p);
            if (x <= umin) {
              const double ax = cdf(x);
              return amin > 0.0 ? umin * ax * ax / (2.0 * amin) : 0.0;
            }
            const double t_x = (x == kInf) ? kInf : hall_return_period(p, x);
            return umin * amin / 2.0 +
                   p.c * (power_integral(p.xi - 2.0, p.t_min, t_x) +
                          p.d * power_integral(p.xi + p.rho - 2.0, p.t_min, t_x));
          },
      },
      params_);
}

double LossModel::auxiliary(double t) const {
  if (!(t > 1.0)) throw DomainError("auxiliary: requires t > 1");
  return std::visit(
      Overloaded{
          [&](const ParetoParams&) { return 0.0; },
          [&](const BurrParams& p) {
            return 1.0 / (p.tau * p.kappa) / std::expm1(std::log(t) / p.kappa);
          },
          [&](const GandHParams& p) {
            const double prob = 1.0 / t;
            const double z = -normal_inv_cdf(prob);
            const double u = p.a + p.b * gh_transform(p, z);
            return p.b * gh_transform_deriv(p, z) * prob / (normal_pdf(z) * u) - p.h;
          },
          [&](const ExactHallParams& p) {
            if (t < p.t_min) return 1.0 / (t - 1.0) - p.xi;
            const double dt = p.d * std::pow(t, p.rho);
            return p.rho * dt / (1.0 + dt);
          },
      },
      params_);
}

SecondOrderInfo LossModel::second_order_info() const {
  return std::visit(Overloaded{
                        [](const ParetoParams& p) {
                          return SecondOrderInfo{p.xi, -kInf, 1.0, std::nullopt, p.xi < 1.0};
                        },
                        [](const BurrParams& p) {
                          const double xi = 1.0 / (p.tau * p.kappa);
                          return SecondOrderInfo{xi, -1.0 / p.kappa, 1.0, -1.0 / p.tau,
                                                 p.tau * p.kappa > 1.0};
                        },
                        [](const GandHParams& p) {
                          return SecondOrderInfo{p.h, 0.0, std::nullopt, std::nullopt, p.h < 1.0};
                        },
                        [](const ExactHallParams& p) {
                          return SecondOrderInfo{p.xi, p.rho, p.c, p.d, p.xi < 1.0};
                        },
                    },
                    params_);
}

double LossModel::draw(std::mt19937_64& rng) const {
  const double u = open_uniform(rng);
  if (const auto* p = std::get_if<GandHParams>(&params_)) {
    return p->a + p->b * gh_transform(*p, normal_inv_cdf(u));
  }
  return upper_quantile(u);
}

std::vector<double> LossModel::sample(std::uint64_t seed, std::size_t count) const {
  if (count == 0) throw DomainError("sample: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (double& v : out) v = draw(rng);
  return out;
}

std::string LossModel::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind());
  std::visit(Overloaded{
                 [&](const ParetoParams& p) { j["xi"] = p.xi; },
                 [&](const BurrParams& p) {
                   j["tau"] = p.tau;
                   j["kappa"] = p.kappa;
                 },
                 [&](const GandHParams& p) {
                   j["a"] = p.a;
                   j["b"] = p.b;
                   j["g"] = p.g;
                   j["h"] = p.h;
                 },
                 [&](const ExactHallParams& p) {
                   j["c"] = p.c;
                   j["d"] = p.d;
                   j["xi"] = p.xi;
                   j["rho"] = p.rho;
                   if (p.t_min != 1.0) j["t_min"] = p.t_min;
                 },
             },
             params_);
  return j.dump();
}

}  // namespace tailconc
