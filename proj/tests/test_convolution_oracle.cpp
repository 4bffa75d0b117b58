#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tailconc/convolution_oracle.hpp"
#include "tailconc/errors.hpp"
#include "tailconc/monte_carlo.hpp"
#include "tailconc/second_order.hpp"

using namespace tailconc;
using doctest::Approx;

namespace {

// P(X + Y > x) for two Pareto(xi = 0.5) losses by Simpson in the density form.
double pareto05_pair_tail(double x) {
  if (x <= 2.0) return 1.0;
  auto f = [x](double y) { return std::pow(x - y, -2.0) * 2.0 * std::pow(y, -3.0); };
  const double half = 0.5 * x;
  const double mid = std::min(std::sqrt(x), half);
  return 2.0 * (oracle::simpson(f, 1.0, mid, 1e-16) + oracle::simpson(f, mid, half, 1e-16)) +
         std::pow(half, -4.0);
}

}  // namespace

TEST_CASE("pairwise tail against an independent quadrature") {
  for (double x : {2.5, 5.0, 40.0, 1e3, 1e5}) {
    CAPTURE(x);
    CHECK(detail::pairwise_tail(LossModel::pareto(0.5), x, 1e-10) ==
          Approx(pareto05_pair_tail(x)).epsilon(1e-8));
  }
}

TEST_CASE("below the support the sum tail is one") {
  const auto grid = convolve_tail(LossModel::pareto(0.5), 2, GridSpec{512});
  CHECK(grid.tail_at(1.9) == 1.0);
  CHECK(grid.tail_at(-3.0) == 1.0);
  const auto burr3 = convolve_tail(LossModel::burr(1.0, 2.0), 3, GridSpec{512});
  CHECK(burr3.tail_at(-0.1) == 1.0);
}

TEST_CASE("subexponential limit for Pareto") {
  const LossModel m = LossModel::pareto(0.5);
  const auto grid = convolve_tail(m, 2);
  const double x = m.upper_quantile(1e-8);
  const double ratio = grid.tail_at(x) / m.tail(x);
  CHECK(ratio >= 1.99);
  CHECK(ratio <= 2.01);
}

TEST_CASE("grid invariants") {
  for (int n : {2, 3}) {
    const LossModel m = LossModel::burr(1.0, 2.0);
    const auto grid = convolve_tail(m, n, GridSpec{1024});
    const auto& x = grid.x();
    const auto& g = grid.g_tail();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i > 0) {
        CHECK(x[i] > x[i - 1]);
        CHECK(g[i] <= g[i - 1]);
      }
      CHECK(g[i] >= 0.0);
      CHECK(g[i] <= 1.0);
      CHECK(g[i] >= m.tail(x[i]) * (1 - 1e-12));
      CHECK(g[i] <= std::min(1.0, n * m.tail(x[i] / n)) * (1 + 1e-12));
    }
  }
}

TEST_CASE("iterated convolution matches the direct pairwise formula") {
  // Convolving S_1 = X with X through the gridded step must agree with the
  // direct n = 2 formula.
  for (const LossModel& m : {LossModel::pareto(0.5), LossModel::burr(1.0, 2.0)}) {
    const auto one = convolve_tail(m, 2, GridSpec{4096});
    std::vector<double> xs, gs;
    const double lower = detail::sum_lower_bound(m, 1);
    const double top = m.upper_quantile(1e-10);
    const double scale = m.upper_quantile(0.25) - m.upper_quantile(0.75);
    for (int i = 0; i < 4096; ++i) {
      const double t0 = std::asinh(lower / scale);
      const double t1 = std::asinh(top / scale);
      xs.push_back(i == 0 ? lower : scale * std::sinh(t0 + (t1 - t0) * i / 4095.0));
      gs.push_back(m.tail(xs.back()));
    }
    const TailInterpolant single(xs, gs, scale, m.second_order_info().xi);
    for (double p : {0.3, 1e-2, 1e-4, 1e-6}) {
      const double x = m.upper_quantile(p) * 1.5;
      const double direct = one.tail_at(x);
      const double stepped = detail::convolution_step(m, single, lower, x, 1e-10);
      CHECK(stepped == Approx(direct).epsilon(1e-6));
    }
  }
}

TEST_CASE("Burr(1,2) pairwise tail bounds") {
  const LossModel m = LossModel::burr(1.0, 2.0);
  const auto grid = convolve_tail(m, 2, GridSpec{512});
  for (double x : {0.5, 2.0, 10.0, 100.0}) {
    const double g = grid.tail_at(x);
    CHECK(g >= m.tail(x));
    CHECK(g <= std::min(1.0, 2.0 * m.tail(0.5 * x)));
  }
}

TEST_CASE("oracle quantile") {
  const LossModel m = LossModel::pareto(0.5);
  const auto grid = convolve_tail(m, 2);
  const std::size_t k = grid.x().size() / 2;
  CHECK(oracle_quantile(grid, 1.0 - grid.g_tail()[k]) == Approx(grid.x()[k]).epsilon(1e-9));

  double prev = 0.0;
  for (double a : {0.5, 0.9, 0.99, 0.999, 0.9999, 1 - 1e-8}) {
    const double q = oracle_quantile(grid, a);
    CHECK(q > prev);
    CHECK(pareto05_pair_tail(q) == Approx(1.0 - a).epsilon(1e-7));
    prev = q;
  }
  CHECK_THROWS_AS(oracle_quantile(grid, 1 - 1e-13), RangeError);
}

TEST_CASE("oracle quantile against a large simulation") {
  const LossModel m = LossModel::pareto(0.5);
  const auto grid = convolve_tail(m, 2);
  std::vector<double> sums(20'000'000);
  std::mt19937_64 rng(5);
  for (double& s : sums) s = m.draw(rng) + m.draw(rng);
  const double emp = empirical_quantile(sums, 0.99);
  // Standard error of the order statistic: sqrt(p(1-p)/N) / g(q).
  const double q = oracle_quantile(grid, 0.99);
  const double h = 1e-3 * q;
  const double dens = (grid.tail_at(q - h) - grid.tail_at(q + h)) / (2 * h);
  const double se = std::sqrt(0.99 * 0.01 / sums.size()) / dens;
  CHECK(std::abs(emp - q) <= 4.0 * se);
}

TEST_CASE("first-order limits") {
  CHECK(std::abs(oracle_concentration(LossModel::pareto(0.5), 2, 1 - 1e-8) - std::sqrt(0.5)) <= 1e-3);
  CHECK(std::abs(oracle_concentration(LossModel::pareto(1.25), 2, 1 - 1e-8) - std::pow(2.0, 0.25)) <=
        1e-2);
}

TEST_CASE("second-order coefficient recovered numerically") {
  const LossModel m = LossModel::pareto(0.5);
  const auto grid = convolve_tail(m, 2);
  const double a = 0.9999;
  const double ratio = (oracle_concentration(grid, a) - std::sqrt(0.5)) / a_correction(m, a);
  CHECK(ratio == Approx(0.5).epsilon(0.1));
}

TEST_CASE("tail-ratio diagnostic") {
  const LossModel burr = LossModel::burr(1.0, 2.0);
  const double x = burr.upper_quantile(1e-6);
  const std::vector<double> xs = {x};
  CHECK(tail_ratio_diag(burr, 2, xs).front().second == Approx(4.0).epsilon(0.05));

  const LossModel p = LossModel::pareto(1.25);
  std::vector<double> px;
  for (double e : {-4.0, -6.0, -8.0}) px.push_back(p.upper_quantile(std::pow(10.0, e)));
  const auto d = tail_ratio_diag(p, 2, px);
  const double target = j_const(1.25, 2);
  CHECK(std::abs(d[2].second - target) < std::abs(d[0].second - target));
  CHECK(d[2].second == Approx(target).epsilon(0.05));
}

TEST_CASE("n > 2 and g-and-h") {
  const LossModel m = LossModel::pareto(0.5);
  const auto g3 = convolve_tail(m, 3, GridSpec{1024});
  const double x = m.upper_quantile(1e-8);
  CHECK(g3.tail_at(x) / m.tail(x) == Approx(3.0).epsilon(0.01));
  CHECK(oracle_concentration(g3, 1 - 1e-8) == Approx(std::pow(3.0, -0.5)).epsilon(2e-3));

  const LossModel gh = LossModel::gandh(0, 1, 2, 0.5);
  const auto gg = convolve_tail(gh, 2, GridSpec{1024});
  const double c = oracle_concentration(gg, 0.999);
  CHECK(c == Approx(1.030067909605454).epsilon(1e-6));
  CHECK_THROWS_AS(convolve_tail(m, 9), DomainError);
  CHECK_THROWS_AS(convolve_tail(m, 1), DomainError);
}
