#include "tailconc/convolution_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "quadrature.hpp"
#include "tailconc/errors.hpp"
#include "tailconc/second_order.hpp"

namespace tailconc {
namespace {

constexpr int kMaxTerms = 8;
// Depth of the lower piece in w = -log u beyond its starting point.
constexpr double kLowerDepth = 60.0;

struct Piecewise {
  double value = 0.0;
  double error = 0.0;
};

// int_0^{u_end} h(Q(u)) du with u_end = F(y_end), split at u = 1/2; the lower
// piece in w = -log u, the upper piece in v = -log(1 - u).
template <class H>
Piecewise integrate_quantile_space(const LossModel& model, H&& h, double f_end, double fbar_end,
                                   double rel_tol) {
  Piecewise out;
  const double req = rel_tol * 0.1;
  const double u_lower = std::min(f_end, 0.5);
  if (u_lower > 0.0) {
    const double w0 = -std::log(u_lower);
    const auto r = detail::integrate(
        [&](double w) {
          const double u = std::exp(-w);
          return h(model.quantile(u)) * u;
        },
        w0, w0 + kLowerDepth, req);
    out.value += r.value;
    out.error += r.error;
  }
  if (f_end > 0.5) {
    const auto r = detail::integrate(
        [&](double v) {
          const double p = std::exp(-v);
          return h(model.upper_quantile(p)) * p;
        },
        std::log(2.0), -std::log(fbar_end), req);
    out.value += r.value;
    out.error += r.error;
  }
  return out;
}

void check_error(double value, double error, double rel_tol, double x, const char* what) {
  if (!std::isfinite(value) || error > rel_tol * std::abs(value) + 1e-300) {
    std::ostringstream msg;
    msg << what << " at x = " << x << ": quadrature error estimate " << error
        << " exceeds tolerance " << rel_tol << " for value " << value;
    throw PrecisionError(msg.str());
  }
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(m);
            if (!failure) failure = std::current_exception();
            next.store(count);
            return;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double sum_scale(const LossModel& model) {
  return model.upper_quantile(0.25) - model.upper_quantile(0.75);
}

std::vector<double> grid_nodes(double lower, double upper, double scale, std::size_t points) {
  const double t0 = std::asinh(lower / scale);
  const double t1 = std::asinh(upper / scale);
  std::vector<double> x(points);
  for (std::size_t i = 0; i < points; ++i) {
    x[i] = scale * std::sinh(t0 + (t1 - t0) * static_cast<double>(i) / (points - 1));
  }
  x.front() = lower;
  x.back() = upper;
  return x;
}

void make_monotone(std::vector<double>& g) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = std::clamp(g[i], 0.0, 1.0);
    if (i > 0) g[i] = std::min(g[i], g[i - 1]);
  }
}

double pchip_end_slope(double h0, double h1, double d0, double d1) {
  const double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if ((m < 0.0) != (d0 < 0.0) || m == 0.0) return 0.0;
  if ((d0 < 0.0) != (d1 < 0.0) && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
  return m;
}

}  // namespace

// ---- TailInterpolant -------------------------------------------------------------

TailInterpolant::TailInterpolant(std::vector<double> x, const std::vector<double>& g_tail,
                                 double scale, double xi)
    : x_(std::move(x)), scale_(scale), xi_(xi) {
  const std::size_t n = x_.size();
  if (n < 3 || g_tail.size() != n) throw DomainError("TailInterpolant: need >= 3 matching nodes");
  log_g_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(g_tail[i] > 0.0)) throw RangeError("TailInterpolant: tail underflows to 0 on the grid");
    log_g_[i] = std::log(g_tail[i]);
  }
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = std::asinh(x_[i] / scale_);
  t0_ = t.front();
  h_ = (t.back() - t.front()) / static_cast<double>(n - 1);

  std::vector<double> d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (log_g_[i + 1] - log_g_[i]) / h_;
  slope_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] > 0.0) slope_[i] = 2.0 / (1.0 / d[i - 1] + 1.0 / d[i]);
  }
  slope_[0] = pchip_end_slope(h_, h_, d[0], d[1]);
  slope_[n - 1] = pchip_end_slope(h_, h_, d[n - 2], d[n - 3]);
}

double TailInterpolant::operator()(double x) const {
  if (x <= x_.front()) return 1.0;
  if (x >= x_.back()) return std::exp(log_g_.back() - std::log(x / x_.back()) / xi_);
  const double t = std::asinh(x / scale_);
  const double pos = (t - t0_) / h_;
  auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, double(x_.size() - 2)));
  const double s = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double y = (2 * s3 - 3 * s2 + 1) * log_g_[i] + (s3 - 2 * s2 + s) * h_ * slope_[i] +
                   (-2 * s3 + 3 * s2) * log_g_[i + 1] + (s3 - s2) * h_ * slope_[i + 1];
  return std::min(1.0, std::exp(y));
}

// ---- detail ------------------------------------------------------------------------

namespace detail {

double sum_lower_bound(const LossModel& model, int k) {
  const double lo = model.support_min();
  if (std::isfinite(lo)) return k * lo;
  return k * model.quantile(1e-15);
}

double pairwise_tail(const LossModel& model, double x, double rel_tol) {
  const double y = 0.5 * x;
  const double f_half = model.cdf(y);
  if (f_half <= 0.0) return 1.0;
  const double fbar_half = model.tail(y);
  const Piecewise r = integrate_quantile_space(
      model, [&](double q) { return model.tail(x - q); }, f_half, fbar_half, rel_tol);
  const double value = 2.0 * r.value + fbar_half * fbar_half;
  check_error(value, 2.0 * r.error, rel_tol, x, "pairwise convolution");
  return std::min(1.0, value);
}

double convolution_step(const LossModel& model, const TailInterpolant& previous,
                        double previous_lower, double x, double rel_tol) {
  // With X ~ F and S ~ G >= L split {X + S > x} into {X <= x/2}, {S <= x/2}
  // and {X > x/2, S > x/2}. Integrating the middle piece by parts gives
  //   int_{q <= e} Gbar(x - q) dF(q) + Fbar(x - L) + int_L^{x/2} Gbar(s) f(x - s) ds
  // with e = min(x/2, x - L) and the last term present only when L < x/2.
  const double half = 0.5 * x;
  const double y = x - previous_lower;
  if (model.cdf(y) <= 0.0) return 1.0;
  const double end = std::min(half, y);
  double value = model.tail(y);
  double error = 0.0;
  const double f_end = model.cdf(end);
  if (f_end > 0.0) {
    const Piecewise r = integrate_quantile_space(
        model, [&](double q) { return previous(x - q); }, f_end, model.tail(end), rel_tol);
    value += r.value;
    error += r.error;
  }
  if (previous_lower < half) {
    const double scale = previous.scale();
    const auto r = detail::integrate(
        [&](double t) {
          const double s = scale * std::sinh(t);
          return previous(s) * model.density(x - s) * scale * std::cosh(t);
        },
        std::asinh(previous_lower / scale), std::asinh(half / scale), 0.1 * rel_tol);
    value += r.value;
    error += r.error;
  }
  check_error(value, error, rel_tol, x, "iterated convolution");
  return std::min(1.0, value);
}

}  // namespace detail

// ---- ConvolutionGrid ---------------------------------------------------------------

ConvolutionGrid::ConvolutionGrid(LossModel model, int n, std::vector<double> x,
                                 std::vector<double> g_tail, double tol,
                                 std::optional<TailInterpolant> previous, double previous_lower)
    : model_(std::move(model)),
      n_(n),
      x_(std::move(x)),
      g_tail_(std::move(g_tail)),
      tol_(tol),
      previous_(std::move(previous)),
      previous_lower_(previous_lower) {}

double ConvolutionGrid::tail_at(double x) const {
  if (std::isnan(x)) throw DomainError("tail_at: x is NaN");
  if (x <= detail::sum_lower_bound(model_, n_)) return 1.0;
  if (n_ == 2) return detail::pairwise_tail(model_, x, tol_);
  return detail::convolution_step(model_, *previous_, previous_lower_, x, tol_);
}

ConvolutionGrid convolve_tail(const LossModel& model, int n, const GridSpec& spec) {
  if (n < 2 || n > kMaxTerms) {
    std::ostringstream msg;
    msg << "convolve_tail: n must be in [2, " << kMaxTerms << "] (got " << n << ")";
    throw DomainError(msg.str());
  }
  if (spec.points < 3) throw DomainError("convolve_tail: need at least 3 grid points");
  if (!(spec.top_tail_prob > 0.0 && spec.top_tail_prob < 0.5)) {
    throw DomainError("convolve_tail: top_tail_prob must lie in (0, 0.5)");
  }
  const double scale = sum_scale(model);
  const double xi = model.second_order_info().xi;
  const double top = model.upper_quantile(spec.top_tail_prob);

  std::optional<TailInterpolant> previous;
  double previous_lower = 0.0;
  std::vector<double> x;
  std::vector<double> g;
  for (int k = 2; k <= n; ++k) {
    const double lower = detail::sum_lower_bound(model, k);
    x = grid_nodes(lower, k * top, scale, spec.points);
    g.assign(x.size(), 1.0);
    parallel_for(x.size(), spec.threads, [&](std::size_t i) {
      if (i == 0) return;
      g[i] = (k == 2) ? detail::pairwise_tail(model, x[i], spec.rel_tol)
                      : detail::convolution_step(model, *previous, previous_lower, x[i],
                                                 spec.rel_tol);
    });
    make_monotone(g);
    if (k < n) {
      previous.emplace(x, g, scale, xi);
      previous_lower = lower;
    }
  }
  return ConvolutionGrid(model, n, std::move(x), std::move(g), spec.rel_tol, std::move(previous),
                         previous_lower);
}

double oracle_quantile(const ConvolutionGrid& grid, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("oracle_quantile: alpha outside (0, 1)");
  const double p = 1.0 - alpha;
  const auto& g = grid.g_tail();
  const auto& x = grid.x();
  if (p > g.front() || p < g.back()) {
    std::ostringstream msg;
    msg << "oracle_quantile: tail probability " << p << " outside the grid range [" << g.back()
        << ", " << g.front() << "]";
    throw RangeError(msg.str());
  }
  const auto it = std::partition_point(g.begin(), g.end(), [p](double v) { return v > p; });
  auto j = static_cast<std::size_t>(it - g.begin());
  if (g[j] == p) return x[j];

  const double log_p = std::log(p);
  auto f = [&](double xx) { return std::log(grid.tail_at(xx)) - log_p; };
  std::size_t lo = j - 1;
  std::size_t hi = j;
  // Grid values were made monotone; widen if fresh evaluations disagree.
  for (int widen = 0; widen < 8; ++widen) {
    if (f(x[lo]) >= 0.0 && f(x[hi]) <= 0.0) break;
    if (lo > 0) --lo;
    if (hi + 1 < x.size()) ++hi;
  }
  return detail::find_root(f, x[lo], x[hi], 1e-12);
}

double oracle_concentration(const ConvolutionGrid& grid, double alpha) {
  return oracle_quantile(grid, alpha) / (grid.n() * grid.model().quantile(alpha));
}

double oracle_concentration(const LossModel& model, int n, double alpha, const GridSpec& spec) {
  return oracle_concentration(convolve_tail(model, n, spec), alpha);
}

std::vector<std::pair<double, double>> tail_ratio_diag(const ConvolutionGrid& grid,
                                                       std::span<const double> x_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(x_grid.size());
  const LossModel& model = grid.model();
  for (double x : x_grid) {
    const double ratio = grid.tail_at(x) / model.tail(x);
    out.emplace_back(x, (ratio - grid.n()) / b_function(model, x));
  }
  return out;
}

std::vector<std::pair<double, double>> tail_ratio_diag(const LossModel& model, int n,
                                                       std::span<const double> x_grid,
                                                       const GridSpec& spec) {
  return tail_ratio_diag(convolve_tail(model, n, spec), x_grid);
}

}  // namespace tailconc
