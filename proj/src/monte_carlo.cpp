#include "tailconc/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "tailconc/errors.hpp"

namespace tailconc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t batch) {
  return splitmix64(seed ^ splitmix64(batch));
}

std::size_t rank_index(double alpha, std::size_t n) {
  // ceil(alpha N), tolerant of the representation error of decimal alphas.
  const double an = alpha * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(an - an * 1e-12));
  k = std::clamp<std::size_t>(k, 1, n);
  return k - 1;
}

// Linear interpolation between order statistics (type 7).
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double h = (sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void validate(const SimulationConfig& config) {
  auto fail = [](const std::string& what) { throw DomainError("simulation config: " + what); };
  if (config.n < 2) fail("n must be >= 2");
  if (config.batches < 1) fail("batches must be >= 1");
  if (config.samples < config.batches) fail("samples must be >= batches");
  if (config.samples % config.batches != 0) fail("samples must be divisible by batches");
  if (config.alpha_grid.empty()) fail("alpha grid is empty");
  for (std::size_t i = 0; i < config.alpha_grid.size(); ++i) {
    const double a = config.alpha_grid[i];
    if (!(a > 0.0 && a < 1.0)) fail("alpha grid values must lie in (0, 1)");
    if (i > 0 && !(a > config.alpha_grid[i - 1])) fail("alpha grid must be strictly increasing");
  }
}

std::vector<double> log_spaced_alphas(double alpha_min, double alpha_max, int points) {
  if (!(alpha_min > 0.0 && alpha_max < 1.0 && alpha_min < alpha_max)) {
    throw DomainError("alpha range must satisfy 0 < alpha_min < alpha_max < 1");
  }
  if (points < 1) throw DomainError("points must be >= 1");
  if (points == 1) return {alpha_min};
  const double l0 = std::log(1.0 - alpha_min);
  const double l1 = std::log(1.0 - alpha_max);
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) {
    out[i] = 1.0 - std::exp(l0 + (l1 - l0) * i / (points - 1));
  }
  out.front() = alpha_min;
  out.back() = alpha_max;
  return out;
}

double empirical_quantile(std::span<const double> values, double alpha) {
  std::vector<double> copy(values.begin(), values.end());
  const double a[] = {alpha};
  return empirical_quantiles_inplace(copy, a).front();
}

std::vector<double> empirical_quantiles_inplace(std::span<double> values,
                                                std::span<const double> alphas) {
  if (values.empty()) throw DomainError("empirical_quantile: empty input");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("empirical_quantile: alpha outside (0, 1)");
  }
  std::vector<std::size_t> order(alphas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return alphas[i] < alphas[j]; });

  std::vector<double> out(alphas.size());
  auto first = values.begin();
  for (std::size_t i : order) {
    const auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank_index(alphas[i], values.size()));
    if (nth >= first) {
      std::nth_element(first, nth, values.end());
      first = nth;
    }
    out[i] = *nth;
  }
  return out;
}

ConcentrationCurve empirical_concentration(const LossModel& model, const SimulationConfig& config) {
  validate(config);
  const std::size_t per_batch = config.samples / config.batches;
  const std::size_t n_alpha = config.alpha_grid.size();
  const bool empirical_denominator = config.denominator_mode == DenominatorMode::Empirical;

  unsigned threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  threads = std::clamp<unsigned>(threads, 1, config.batches);

  const std::size_t bytes_per_batch = per_batch * sizeof(double) * (empirical_denominator ? 2 : 1);
  if (bytes_per_batch * threads > config.memory_budget_bytes) {
    std::ostringstream msg;
    msg << "simulation needs " << bytes_per_batch * threads << " bytes of sample buffers ("
        << threads << " concurrent batches), above the budget of " << config.memory_budget_bytes
        << "; raise batches or lower threads";
    throw ResourceError(msg.str());
  }

  std::vector<double> exact_denominator(n_alpha);
  if (!empirical_denominator) {
    for (std::size_t i = 0; i < n_alpha; ++i) exact_denominator[i] = model.quantile(config.alpha_grid[i]);
  }

  // ratios[b * n_alpha + i]
  std::vector<double> ratios(config.batches * n_alpha);
  std::atomic<std::uint32_t> next_batch{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    std::vector<double> sums(per_batch);
    std::vector<double> singles(empirical_denominator ? per_batch : 0);
    for (;;) {
      const std::uint32_t b = next_batch.fetch_add(1);
      if (b >= config.batches) return;
      try {
        std::mt19937_64 rng(batch_seed(config.seed, b));
        for (std::size_t k = 0; k < per_batch; ++k) {
          const double first = model.draw(rng);
          double s = first;
          for (int j = 1; j < config.n; ++j) s += model.draw(rng);
          sums[k] = s;
          if (empirical_denominator) singles[k] = first;
        }
        const auto q_sum = empirical_quantiles_inplace(sums, config.alpha_grid);
        const auto q_single = empirical_denominator
                                  ? empirical_quantiles_inplace(singles, config.alpha_grid)
                                  : exact_denominator;
        for (std::size_t i = 0; i < n_alpha; ++i) {
          ratios[b * n_alpha + i] = q_sum[i] / (config.n * q_single[i]);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next_batch.store(config.batches);
        return;
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ConcentrationCurve curve;
  curve.alpha = config.alpha_grid;
  curve.c_emp.resize(n_alpha);
  curve.ci_lo.resize(n_alpha);
  curve.ci_hi.resize(n_alpha);
  curve.c2.resize(n_alpha);

  const std::uint32_t nb = config.batches;
  std::vector<double> column(nb);
  for (std::size_t i = 0; i < n_alpha; ++i) {
    double sum = 0.0;
    for (std::uint32_t b = 0; b < nb; ++b) {
      column[b] = ratios[b * n_alpha + i];
      sum += column[b];
    }
    const double mean = sum / nb;
    double lo = mean;
    double hi = mean;
    if (nb >= 40) {
      std::sort(column.begin(), column.end());
      lo = sorted_quantile(column, 0.025);
      hi = sorted_quantile(column, 0.975);
    } else if (nb > 1) {
      double ss = 0.0;
      for (double c : column) ss += (c - mean) * (c - mean);
      const double half = 1.96 * std::sqrt(ss / (nb - 1)) / std::sqrt(static_cast<double>(nb));
      lo = mean - half;
      hi = mean + half;
    }
    curve.c_emp[i] = mean;
    curve.ci_lo[i] = std::min(lo, mean);
    curve.ci_hi[i] = std::max(hi, mean);
  }

  const SecondOrderInfo info = model.second_order_info();
  curve.c1 = c1(info.xi, config.n);
  std::optional<double> q;
  curve.regime = classify_regime(info);
  if (curve.regime.tag == RegimeTag::Boundary) q = estimate_boundary_q(model);
  for (std::size_t i = 0; i < n_alpha; ++i) {
    const ApproxResult r = c2(model, config.alpha_grid[i], config.n, q, config.correction_form);
    curve.c2[i] = r.c2;
    curve.regime = r.regime;
    curve.degenerate_flag = r.degenerate_flag;
  }
  return curve;
}

}  // namespace tailconc
