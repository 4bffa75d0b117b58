#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tailconc/loss_models.hpp"

namespace tailconc {

struct GridSpec {
  /// Nodes per convolution level, uniform in asinh(x / scale).
  std::size_t points = 4096;
  /// The grid for S_k reaches k * upper_quantile(top_tail_prob).
  double top_tail_prob = 1e-10;
  /// Relative quadrature tolerance.
  double rel_tol = 1e-10;
  /// 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Monotone cubic (PCHIP) interpolant of log G(x) against asinh(x / scale)
/// on uniform nodes. 1 below the first node, power tail x^(-1/xi) beyond the
/// last.
class TailInterpolant {
 public:
  TailInterpolant(std::vector<double> x, const std::vector<double>& g_tail, double scale, double xi);
  double operator()(double x) const;
  double scale() const { return scale_; }

 private:
  std::vector<double> x_;
  std::vector<double> log_g_;
  std::vector<double> slope_;
  double scale_;
  double t0_;
  double h_;
  double xi_;
};

/// Tail of S_n = X_1 + ... + X_n tabulated on a grid, with exact
/// quadrature-backed evaluation at any point.
class ConvolutionGrid {
 public:
  ConvolutionGrid(LossModel model, int n, std::vector<double> x, std::vector<double> g_tail,
                  double tol, std::optional<TailInterpolant> previous, double previous_lower);

  const LossModel& model() const { return model_; }
  int n() const { return n_; }
  double tol() const { return tol_; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& g_tail() const { return g_tail_; }

  /// P(S_n > x) by quadrature: exact pairwise formula for n = 2, one
  /// convolution step against the interpolated S_{n-1} tail for n > 2.
  double tail_at(double x) const;

 private:
  LossModel model_;
  int n_;
  std::vector<double> x_;
  std::vector<double> g_tail_;
  double tol_;
  std::optional<TailInterpolant> previous_;
  double previous_lower_;
};

/// Throws DomainError unless 2 <= n <= 8; PrecisionError when a quadrature
/// error estimate exceeds the tolerance.
ConvolutionGrid convolve_tail(const LossModel& model, int n, const GridSpec& spec = {});

/// x with P(S_n > x) = 1 - alpha. Throws RangeError when 1 - alpha lies
/// outside the tabulated tail range.
double oracle_quantile(const ConvolutionGrid& grid, double alpha);

double oracle_concentration(const ConvolutionGrid& grid, double alpha);
double oracle_concentration(const LossModel& model, int n, double alpha, const GridSpec& spec = {});

/// (x, (G(x)/F(x) - n) / b(x)) with G the tail of S_n and F that of X.
std::vector<std::pair<double, double>> tail_ratio_diag(const ConvolutionGrid& grid,
                                                       std::span<const double> x_grid);
std::vector<std::pair<double, double>> tail_ratio_diag(const LossModel& model, int n,
                                                       std::span<const double> x_grid,
                                                       const GridSpec& spec = {});

namespace detail {

/// P(X_1 + X_2 > x) = 2 int_0^{F(x/2)} Fbar(x - Q(u)) du + Fbar(x/2)^2.
double pairwise_tail(const LossModel& model, double x, double rel_tol);

/// P(S_k + X > x) = int_0^{u*} Gbar_k(x - Q(u)) du + Fbar(x - lower_k), with
/// u* = F(x - lower_k) and Gbar_k = 1 below lower_k.
double convolution_step(const LossModel& model, const TailInterpolant& previous,
                        double previous_lower, double x, double rel_tol);

/// Lower end used for the support of S_k.
double sum_lower_bound(const LossModel& model, int k);

}  // namespace detail

}  // namespace tailconc
