#pragma once

#include <optional>
#include <string>

#include "tailconc/loss_models.hpp"

namespace tailconc {

enum class RegimeTag { Fast, Slow, Boundary, Degenerate };

std::string to_string(RegimeTag tag);

struct Regime {
  RegimeTag tag = RegimeTag::Fast;
  /// Boundary only: the constant q, if supplied or already estimated.
  std::optional<double> q;
  /// Degenerate only: why no proper second-order term exists.
  std::string reason;
};

struct ApproxResult {
  double c1 = 0.0;
  double c2 = 0.0;
  /// c2 - c1.
  double correction = 0.0;
  Regime regime;
  bool degenerate_flag = false;
};

/// Which A(alpha) to use: the generic path (b o quantile, or the auxiliary
/// function) or the Hall-class closed forms.
enum class CorrectionForm { Analytic, HallClosedForm };

enum class Approach { FromAbove, FromBelow, ModelDependent };

std::string to_string(Approach a);

struct ApproachResult {
  Approach direction = Approach::ModelDependent;
  /// lim C2'(alpha) as alpha -> 1; +-infinity allowed, NaN when unknown.
  double derivative_limit = 0.0;
};

/// c_xi: 1/xi for xi <= 1, (1-xi) Gamma(1-1/xi)^2 / (2 Gamma(1-2/xi)) for
/// xi > 1. Exactly 0 at xi = 2.
double c_xi(double xi);

/// The xi > 1 branch evaluated literally through Gamma at 1 - 2/xi. Throws
/// PoleError at xi = 2.
double c_xi_gamma_branch(double xi);

/// J_xi(n) = n (n-1) c_xi.
double j_const(double xi, int n);

/// Second-order subexponential rate b(x) of the model.
double b_function(const LossModel& model, double x);

/// H_{xi,rho}(s) = s^xi (s^rho - 1)/rho, s^xi log s at rho = 0.
double h_kernel(double xi, double rho, double s);

Regime classify_regime(const SecondOrderInfo& info, std::optional<double> q_hint = std::nullopt);

/// K_{xi,rho}(n). Throws BoundaryRegimeError when rho = -(1 ^ xi).
double k_coefficient(double xi, double rho, int n);

/// A(alpha). Throws BoundaryRegimeError in the boundary regime. For models
/// outside the Hall class the closed-form request falls back to Analytic.
double a_correction(const LossModel& model, double alpha,
                    CorrectionForm form = CorrectionForm::Analytic);

/// n^(xi-1).
double c1(double xi, int n);

/// Estimate of q = lim b(F^<-(alpha)) / a(1/(1-alpha)) at alpha = 1 - 1e-8.
double estimate_boundary_q(const LossModel& model);

ApproxResult c2(const LossModel& model, double alpha, int n, std::optional<double> q = std::nullopt,
                CorrectionForm form = CorrectionForm::Analytic);

ApproachResult approach_direction(const LossModel& model, int n);

/// Root of C2(alpha) = 1 in [alpha_lo, alpha_hi] closest to alpha_hi, or
/// nullopt when C2 - 1 has no sign change there.
std::optional<double> crossover(const LossModel& model, int n, double alpha_lo, double alpha_hi,
                                CorrectionForm form = CorrectionForm::Analytic);

}  // namespace tailconc
