#include "tailconc/second_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <variant>
#include <vector>

#include "quadrature.hpp"
#include "tailconc/errors.hpp"
#include "tailconc/special_functions.hpp"

namespace tailconc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQLevel = 1e-8;

void require_n(int n) {
  if (n < 2) {
    std::ostringstream msg;
    msg << "n must be >= 2 (got " << n << ")";
    throw DomainError(msg.str());
  }
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream msg;
    msg << "alpha = " << alpha << " outside (0, 1)";
    throw DomainError(msg.str());
  }
}

bool is_boundary(double xi, double rho) { return rho == -std::min(1.0, xi); }

[[noreturn]] void throw_boundary(double xi, double rho) {
  std::ostringstream msg;
  msg << "rho = " << rho << " = -(1 ^ xi) for xi = " << xi
      << ": boundary regime, use c2 with q (boundary coefficient)";
  throw BoundaryRegimeError(msg.str());
}

double pow_int(int n, double e) { return std::pow(static_cast<double>(n), e); }

}  // namespace

std::string to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::Fast: return "fast";
    case RegimeTag::Slow: return "slow";
    case RegimeTag::Boundary: return "boundary";
    case RegimeTag::Degenerate: return "degenerate";
  }
  return "unknown";
}

std::string to_string(Approach a) {
  switch (a) {
    case Approach::FromAbove: return "from_above";
    case Approach::FromBelow: return "from_below";
    case Approach::ModelDependent: return "model_dependent";
  }
  return "unknown";
}

double c_xi(double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("c_xi: requires finite xi > 0");
  if (xi <= 1.0) return 1.0 / xi;
  // With w = 1 - 1/xi the Gamma ratio becomes
  // xi (1 - 2w) Gamma(1+w)^2 / Gamma(1+2w); no poles on xi > 1.
  const double w = 1.0 - 1.0 / xi;
  const double g1 = gamma(1.0 + w);
  return (2.0 - xi) * g1 * g1 / gamma(1.0 + 2.0 * w);
}

double c_xi_gamma_branch(double xi) {
  if (!(xi >= 1.0) || !std::isfinite(xi)) {
    throw DomainError("c_xi_gamma_branch: requires finite xi >= 1");
  }
  if (xi == 1.0) return 1.0;  // limit: (1 - xi) Gamma(1 - 1/xi)^2 -> 1 and Gamma(-1) pole cancels
  const double g1 = gamma(1.0 - 1.0 / xi);
  return (1.0 - xi) * g1 * g1 / (2.0 * gamma(1.0 - 2.0 / xi));
}

double j_const(double xi, int n) {
  require_n(n);
  return static_cast<double>(n) * (n - 1) * c_xi(xi);
}

double b_function(const LossModel& model, double x) {
  const SecondOrderInfo info = model.second_order_info();
  if (info.xi < 1.0 || (info.xi == 1.0 && info.mean_finite)) {
    return model.truncated_mean(kInf) / x;
  }
  if (info.xi == 1.0) return model.truncated_mean(x) / x;
  return model.tail(x) / (info.xi - 1.0);
}

double h_kernel(double xi, double rho, double s) {
  if (!(s > 0.0)) throw DomainError("h_kernel: requires s > 0");
  if (rho > 0.0) throw DomainError("h_kernel: requires rho <= 0");
  const double ls = std::log(s);
  if (rho == 0.0) return std::pow(s, xi) * ls;
  if (rho == -kInf) {
    // (s^rho - 1)/rho -> 0 for s >= 1.
    if (s >= 1.0) return 0.0;
    return kInf;
  }
  return std::pow(s, xi) * std::expm1(rho * ls) / rho;
}

Regime classify_regime(const SecondOrderInfo& info, std::optional<double> q_hint) {
  Regime r;
  const double bound = -std::min(1.0, info.xi);
  if (info.rho < bound) {
    if (info.xi == 2.0) {
      r.tag = RegimeTag::Degenerate;
      r.reason = "xi = 2 in the fast regime: c_xi = 0, no proper second-order term";
    } else {
      r.tag = RegimeTag::Fast;
    }
  } else if (info.rho > bound) {
    r.tag = RegimeTag::Slow;
  } else {
    r.tag = RegimeTag::Boundary;
    r.q = q_hint;
  }
  return r;
}

double k_coefficient(double xi, double rho, int n) {
  require_n(n);
  if (!(xi > 0.0)) throw DomainError("k_coefficient: requires xi > 0");
  if (is_boundary(xi, rho)) throw_boundary(xi, rho);
  if (rho < -std::min(1.0, xi)) {
    if (xi <= 1.0) return static_cast<double>(n - 1) / n;
    return pow_int(n, xi - 2.0) * (n - 1) * xi * c_xi(xi);
  }
  const double ln = std::log(static_cast<double>(n));
  if (rho == 0.0) return pow_int(n, xi - 1.0) * ln;
  return pow_int(n, xi - 1.0) * std::expm1(rho * ln) / rho;
}

double a_correction(const LossModel& model, double alpha, CorrectionForm form) {
  require_alpha(alpha);
  const SecondOrderInfo info = model.second_order_info();
  if (is_boundary(info.xi, info.rho)) throw_boundary(info.xi, info.rho);
  const bool fast = info.rho < -std::min(1.0, info.xi);
  const double tail_prob = 1.0 - alpha;

  if (form == CorrectionForm::HallClosedForm && info.hall_c) {
    if (fast) {
      if (info.xi < 1.0 || (info.xi == 1.0 && info.mean_finite)) {
        return model.truncated_mean(kInf) / *info.hall_c * std::pow(tail_prob, info.xi);
      }
      if (info.xi == 1.0) return -tail_prob * std::log(tail_prob);
      return tail_prob / (info.xi - 1.0);
    }
    return *info.hall_d * info.rho * std::pow(tail_prob, -info.rho);
  }

  if (fast) return b_function(model, model.quantile(alpha));
  if (const auto* p = std::get_if<GandHParams>(&model.params())) {
    // Leading term of a(1/(1-alpha)) for g-and-h.
    return p->g / normal_inv_cdf(alpha);
  }
  return model.auxiliary(1.0 / tail_prob);
}

double c1(double xi, int n) {
  require_n(n);
  return pow_int(n, xi - 1.0);
}

double estimate_boundary_q(const LossModel& model) {
  const double alpha = 1.0 - kQLevel;
  const double q = b_function(model, model.quantile(alpha)) / model.auxiliary(1.0 / kQLevel);
  if (!std::isfinite(q) || q == 0.0) {
    throw PrecisionError("boundary regime: numeric estimate of q is zero or not finite");
  }
  return q;
}

ApproxResult c2(const LossModel& model, double alpha, int n, std::optional<double> q,
                CorrectionForm form) {
  require_alpha(alpha);
  const SecondOrderInfo info = model.second_order_info();
  ApproxResult out;
  out.regime = classify_regime(info, q);
  out.c1 = c1(info.xi, n);

  switch (out.regime.tag) {
    case RegimeTag::Degenerate:
      out.degenerate_flag = true;
      out.correction = 0.0;
      break;
    case RegimeTag::Boundary: {
      if (!out.regime.q) out.regime.q = estimate_boundary_q(model);
      const double xi = info.xi;
      const double coef = xi * pow_int(n, xi - 2.0) * pow_int(n, -std::min(1.0, xi)) *
                              j_const(xi, n) * *out.regime.q +
                          h_kernel(xi, info.rho, n) / n;
      out.correction = coef * model.auxiliary(1.0 / (1.0 - alpha));
      break;
    }
    case RegimeTag::Fast:
    case RegimeTag::Slow:
      out.correction = k_coefficient(info.xi, info.rho, n) * a_correction(model, alpha, form);
      break;
  }
  out.c2 = out.c1 + out.correction;
  return out;
}

ApproachResult approach_direction(const LossModel& model, int n) {
  require_n(n);
  const SecondOrderInfo info = model.second_order_info();
  const Regime regime = classify_regime(info);
  ApproachResult out;
  auto from_sign = [](double correction) {
    return correction > 0.0 ? Approach::FromAbove
                            : (correction < 0.0 ? Approach::FromBelow : Approach::ModelDependent);
  };

  switch (regime.tag) {
    case RegimeTag::Degenerate:
      out.direction = Approach::ModelDependent;
      out.derivative_limit = 0.0;
      return out;
    case RegimeTag::Fast: {
      const double xi = info.xi;
      if (xi < 1.0 || (xi == 1.0 && !info.mean_finite)) {
        out.derivative_limit = -kInf;
      } else if (xi == 1.0) {
        out.derivative_limit = -static_cast<double>(n - 1) / n * model.truncated_mean(kInf) /
                               info.hall_c.value_or(1.0);
      } else {
        out.derivative_limit = pow_int(n, xi - 2.0) * (n - 1) * xi * c_xi(xi) / (1.0 - xi);
      }
      out.direction = from_sign(c2(model, 1.0 - kQLevel, n).correction);
      return out;
    }
    case RegimeTag::Slow:
      if (info.hall_d) {
        out.direction = *info.hall_d < 0.0 ? Approach::FromAbove : Approach::FromBelow;
        out.derivative_limit = *info.hall_d < 0.0 ? -kInf : kInf;
      } else {
        out.direction = Approach::ModelDependent;
        out.derivative_limit = std::numeric_limits<double>::quiet_NaN();
      }
      return out;
    case RegimeTag::Boundary:
      out.direction = from_sign(c2(model, 1.0 - kQLevel, n).correction);
      out.derivative_limit = std::numeric_limits<double>::quiet_NaN();
      return out;
  }
  return out;
}

std::optional<double> crossover(const LossModel& model, int n, double alpha_lo, double alpha_hi,
                                CorrectionForm form) {
  require_n(n);
  require_alpha(alpha_lo);
  require_alpha(alpha_hi);
  if (!(alpha_lo < alpha_hi)) throw DomainError("crossover: requires alpha_lo < alpha_hi");
  const SecondOrderInfo info = model.second_order_info();
  if (info.xi == 1.0) return std::nullopt;

  std::optional<double> q;
  if (classify_regime(info).tag == RegimeTag::Boundary) q = estimate_boundary_q(model);
  auto f = [&](double alpha) { return c2(model, alpha, n, q, form).c2 - 1.0; };

  // Scan log-spaced in 1 - alpha, starting next to alpha_hi.
  constexpr int kPoints = 400;
  const double l_hi = std::log(1.0 - alpha_hi);
  const double l_lo = std::log(1.0 - alpha_lo);
  double prev_alpha = alpha_hi;
  double prev_f = f(alpha_hi);
  if (prev_f == 0.0) return alpha_hi;
  for (int i = 1; i < kPoints; ++i) {
    const double alpha =
        (i == kPoints - 1) ? alpha_lo : 1.0 - std::exp(l_hi + (l_lo - l_hi) * i / (kPoints - 1));
    const double fa = f(alpha);
    if (fa == 0.0) return alpha;
    if ((fa < 0.0) != (prev_f < 0.0)) return detail::find_root(f, alpha, prev_alpha, 1e-15);
    prev_alpha = alpha;
    prev_f = fa;
  }
  return std::nullopt;
}

}  // namespace tailconc
