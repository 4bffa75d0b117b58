#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tailconc/loss_models.hpp"
#include "tailconc/second_order.hpp"

namespace tailconc {

/// Denominator of the empirical ratio: the empirical single-loss quantile
/// (from the first summand of every simulated sum) or the model quantile.
enum class DenominatorMode { Empirical, Exact };

struct SimulationConfig {
  int n = 2;
  std::uint64_t samples = 10'000'000;
  std::uint32_t batches = 20;
  std::uint64_t seed = 42;
  std::vector<double> alpha_grid;
  DenominatorMode denominator_mode = DenominatorMode::Empirical;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// Upper bound on simultaneously held sample buffers.
  std::size_t memory_budget_bytes = std::size_t{4} << 30;
  CorrectionForm correction_form = CorrectionForm::Analytic;
};

/// Throws DomainError for an inconsistent configuration.
void validate(const SimulationConfig& config);

struct ConcentrationCurve {
  std::vector<double> alpha;
  std::vector<double> c_emp;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  double c1 = 0.0;
  std::vector<double> c2;
  std::optional<std::vector<double>> c_oracle;
  Regime regime;
  bool degenerate_flag = false;
};

/// 1 - alpha log-spaced from 1 - alpha_min down to 1 - alpha_max.
std::vector<double> log_spaced_alphas(double alpha_min, double alpha_max, int points);

/// Order statistic of rank ceil(alpha N); selection, no full sort.
double empirical_quantile(std::span<const double> values, double alpha);

/// Same, reordering values in place. alphas need not be sorted.
std::vector<double> empirical_quantiles_inplace(std::span<double> values,
                                                std::span<const double> alphas);

/// Ratio VaR(sum)/(n VaR(single)) per alpha and batch, summarised over
/// batches. Deterministic for a fixed seed whatever the thread count.
ConcentrationCurve empirical_concentration(const LossModel& model, const SimulationConfig& config);

}  // namespace tailconc
