#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "tailconc/errors.hpp"
#include "tailconc/second_order.hpp"
#include "tailconc/special_functions.hpp"

using namespace tailconc;
using doctest::Approx;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("c_xi values") {
  CHECK(c_xi(0.5) == 2.0);
  CHECK(c_xi(0.25) == 4.0);
  CHECK(c_xi(1.0) == 1.0);
  CHECK(std::abs(c_xi(1.0 + 1e-12) - 1.0) <= 1e-10);
  CHECK(std::abs(c_xi(2.0)) <= 1e-10);
  CHECK(c_xi(1.25) == Approx(oracle::kCXi125).epsilon(1e-13));
  CHECK(c_xi(1.5) == Approx(oracle::kCXi15).epsilon(1e-13));
  CHECK(c_xi(1.75) == Approx(oracle::kCXi175).epsilon(1e-13));
  CHECK(c_xi(2.5) == Approx(oracle::kCXi25).epsilon(1e-13));
  CHECK(c_xi(3.0) == Approx(oracle::kCXi3).epsilon(1e-13));
}

TEST_CASE("c_xi matches the literal Gamma formula") {
  // (1 - xi) Gamma(1 - 1/xi)^2 / (2 Gamma(1 - 2/xi)), with Gamma(-0.6) at xi = 1.25.
  const double g02 = tailconc::gamma(0.2);
  CHECK((1 - 1.25) * g02 * g02 / (2 * oracle::kGammaMinus06) == Approx(oracle::kCXi125).epsilon(1e-12));
  for (double xi : {1.1, 1.25, 1.5, 1.75, 1.9, 2.1, 2.5, 3.0, 5.0}) {
    CAPTURE(xi);
    CHECK(c_xi(xi) == Approx(c_xi_gamma_branch(xi)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(c_xi_gamma_branch(2.0), PoleError);
  CHECK(c_xi_gamma_branch(1.0) == 1.0);
}

TEST_CASE("c_xi strictly decreasing with a sign change at 2") {
  const std::vector<double> grid = {0.25, 0.5, 1, 1.25, 1.5, 1.75, 2, 2.5, 3};
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(c_xi(grid[i]) < c_xi(grid[i - 1]));
  CHECK(c_xi(1.999) > 0.0);
  CHECK(c_xi(2.001) < 0.0);
}

TEST_CASE("j_const") {
  CHECK(j_const(0.5, 2) == 4.0);
  CHECK(std::abs(j_const(2.0, 5)) <= 1e-12);
  CHECK(j_const(1.0, 3) == 6.0);
  CHECK_THROWS_AS(j_const(0.5, 1), DomainError);
}

TEST_CASE("b_function") {
  CHECK(b_function(LossModel::pareto(0.5), 20.0) == Approx(0.1).epsilon(1e-14));
  const LossModel p125 = LossModel::pareto(1.25);
  CHECK(b_function(p125, p125.quantile(0.99)) == Approx(0.04).epsilon(1e-12));
  // Burr(1,1): mu(x) = log(1 + x) - x/(1 + x).
  const LossModel b11 = LossModel::burr(1.0, 1.0);
  for (double x : {10.0, 1e3, 1e6}) {
    const double mu = std::log1p(x) - x / (1.0 + x);
    CHECK(b_function(b11, x) == Approx(mu / x).epsilon(1e-8));
  }
}

TEST_CASE("h_kernel") {
  for (double xi : {0.3, 1.0, 2.5}) {
    for (double rho : {0.0, -0.5, -2.0, -kInf}) CHECK(h_kernel(xi, rho, 1.0) == 0.0);
  }
  CHECK(h_kernel(0.5, 0.0, 2.0) == Approx(std::sqrt(2.0) * std::log(2.0)).epsilon(1e-15));
  CHECK(std::abs(h_kernel(0.5, -1e-8, 2.0) - h_kernel(0.5, 0.0, 2.0)) <= 1e-7);
  // Series: s^xi log s (1 + rho log s / 2).
  const double l2 = std::log(2.0);
  CHECK(h_kernel(0.5, -1e-8, 2.0) ==
        Approx(std::sqrt(2.0) * l2 * (1.0 - 0.5e-8 * l2)).epsilon(1e-14));
  for (double s : {1.5, 2.0, 10.0, 1e3}) {
    for (double rho : {0.0, -0.1, -1.0, -5.0}) CHECK(h_kernel(0.7, rho, s) > 0.0);
  }
}

TEST_CASE("classify_regime") {
  CHECK(classify_regime(LossModel::burr(0.25, 8).second_order_info()).tag == RegimeTag::Slow);
  CHECK(classify_regime(LossModel::pareto(0.5).second_order_info()).tag == RegimeTag::Fast);
  CHECK(classify_regime(LossModel::burr(2, 1).second_order_info()).tag == RegimeTag::Fast);
  CHECK(classify_regime(LossModel::gandh(0, 1, 2, 0.5).second_order_info()).tag == RegimeTag::Slow);
  CHECK(classify_regime(LossModel::pareto(2.0).second_order_info()).tag == RegimeTag::Degenerate);
  const Regime b = classify_regime(LossModel::burr(1, 1).second_order_info(), 0.7);
  CHECK(b.tag == RegimeTag::Boundary);
  CHECK(*b.q == 0.7);
}

TEST_CASE("k_coefficient") {
  CHECK(k_coefficient(0.5, -kInf, 2) == 0.5);
  CHECK(k_coefficient(1.0, -2.0, 4) == 0.75);
  CHECK(k_coefficient(0.5, 0.0, 2) == Approx(std::sqrt(0.5) * std::log(2.0)).epsilon(1e-15));
  CHECK(k_coefficient(1.25, -2.0, 2) ==
        Approx(std::pow(2.0, -0.75) * 1.25 * oracle::kCXi125).epsilon(1e-13));
  CHECK(std::abs(k_coefficient(1 - 1e-6, -2.0, 3) - k_coefficient(1 + 1e-6, -2.0, 3)) <= 1e-4);
  CHECK_THROWS_AS(k_coefficient(0.5, -0.5, 2), BoundaryRegimeError);
  CHECK_THROWS_AS(k_coefficient(1.5, -1.0, 2), BoundaryRegimeError);
}

TEST_CASE("a_correction") {
  const LossModel p05 = LossModel::pareto(0.5);
  CHECK(a_correction(p05, 0.99) == Approx(0.2).epsilon(1e-13));
  CHECK(a_correction(LossModel::pareto(1.25), 0.99) == Approx(0.04).epsilon(1e-12));
  const LossModel gh = LossModel::gandh(0, 1, 2, 0.5);
  CHECK(a_correction(gh, 0.999) == Approx(2.0 / oracle::kNormalQuantile0999).epsilon(1e-14));
  CHECK_THROWS_AS(a_correction(LossModel::burr(1, 1), 0.99), BoundaryRegimeError);
}

TEST_CASE("Hall closed forms agree with the generic path") {
  // The closed forms keep the leading term only, so the ratio tends to one
  // at rate t^rho.
  for (const LossModel& m :
       {LossModel::burr(0.25, 8.0), LossModel::burr(2.0, 1.0), LossModel::burr(3.0, 0.5),
        LossModel::pareto(0.5), LossModel::pareto(1.25), LossModel::exact_hall(1, -0.5, 0.5, -0.25),
        LossModel::exact_hall(2, 0.1, 0.5, -3.0), LossModel::exact_hall(1, 0.3, 1.5, -2.0)}) {
    CAPTURE(m.to_json());
    auto gap = [&](double a) {
      const double closed = a_correction(m, a, CorrectionForm::HallClosedForm);
      return closed == 0.0 ? std::abs(a_correction(m, a)) : std::abs(a_correction(m, a) / closed - 1.0);
    };
    const double far = gap(1.0 - 1e-4);
    const double near = gap(1.0 - 1e-8);
    CHECK(near <= std::max(far, 1e-9));
    CHECK(near < 0.15);
  }
}

TEST_CASE("c1") {
  CHECK(c1(0.5, 2) == Approx(0.70710678118654752).epsilon(1e-15));
  CHECK(c1(1.0, 7) == 1.0);
  CHECK(c1(1.25, 2) == Approx(1.189207115002721).epsilon(1e-15));
}

TEST_CASE("c2 examples") {
  const LossModel p05 = LossModel::pareto(0.5);
  const ApproxResult r = c2(p05, 0.99, 2);
  CHECK(r.c2 == Approx(0.80710678118654752).epsilon(1e-13));
  CHECK(r.c2 == r.c1 + r.correction);
  CHECK_FALSE(r.degenerate_flag);

  const LossModel gh = LossModel::gandh(0, 1, 2, 0.5);
  for (double a : {0.95, 0.99, 0.999, 0.9997}) {
    const double z = oracle::normal_upper_quantile(1.0 - a);
    CHECK(std::abs(c2(gh, a, 2).c2 - std::sqrt(0.5) * (1.0 + 2.0 * std::log(2.0) / z)) <= 1e-12);
  }

  const LossModel burr = LossModel::burr(0.25, 8.0);
  const double a = 1.0 - 1e-6;
  const double expected = std::sqrt(0.5) +
                       4.0 * std::sqrt(0.5) * (1 - std::pow(2.0, -0.125)) * std::pow(1 - a, 0.125);
  CHECK(c2(burr, a, 2, std::nullopt, CorrectionForm::HallClosedForm).c2 ==
        Approx(expected).epsilon(1e-13));
  CHECK(c2(burr, a, 2).c2 == Approx(expected).epsilon(2e-2));

  const ApproxResult d = c2(LossModel::pareto(2.0), 0.99, 2);
  CHECK(d.degenerate_flag);
  CHECK(d.correction == 0.0);
  CHECK(d.c2 == Approx(2.0));
  CHECK(d.regime.tag == RegimeTag::Degenerate);
}

TEST_CASE("c2 converges to c1") {
  for (const LossModel& m :
       {LossModel::pareto(0.5), LossModel::pareto(1.25), LossModel::burr(0.5, 4.0),
        LossModel::burr(2.0, 1.0), LossModel::exact_hall(1, 0.5, 0.5, -0.25),
        LossModel::exact_hall(1, -0.5, 1.5, -2)}) {
    const ApproxResult r = c2(m, 1.0 - 1e-10, 2);
    CHECK(std::abs(r.c2 - r.c1) <= 1e-3);
  }
}

TEST_CASE("Pareto fast-case correction") {
  const LossModel p = LossModel::pareto(0.5);
  for (int n : {2, 3, 5}) {
    for (double a : {0.9, 0.99, 0.999}) {
      const double direct = (n - 1.0) / n * 2.0 * std::pow(1.0 - a, 0.5);
      CHECK(c2(p, a, n).correction == Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("boundary regime") {
  // Burr(1, 1) sits on the boundary but its ratio b/a grows like log t, so q is supplied.
  const LossModel m = LossModel::burr(1.0, 1.0);
  const ApproxResult r = c2(m, 0.999, 2, 1.5);
  CHECK(r.regime.tag == RegimeTag::Boundary);
  const double a_t = m.auxiliary(1000.0);
  const double expected = 1.0 + (1.0 * 0.5 * 0.5 * 2.0 * 1.5 + h_kernel(1.0, -1.0, 2.0) / 2.0) * a_t;
  CHECK(r.c2 == Approx(expected).epsilon(1e-14));
  CHECK(std::isfinite(estimate_boundary_q(m)));
}

TEST_CASE("approach direction") {
  const auto p = approach_direction(LossModel::pareto(0.5), 2);
  CHECK(p.direction == Approach::FromAbove);
  CHECK(p.derivative_limit == -kInf);
  CHECK(approach_direction(LossModel::burr(0.25, 8), 2).direction == Approach::FromAbove);
  CHECK(approach_direction(LossModel::exact_hall(1, 0.5, 0.5, -0.25), 2).direction ==
        Approach::FromBelow);
  CHECK(approach_direction(LossModel::gandh(0, 1, 2, 0.5), 2).direction == Approach::ModelDependent);

  const auto heavy = approach_direction(LossModel::pareto(3.0), 2);
  CHECK(heavy.direction == Approach::FromBelow);
  CHECK(heavy.derivative_limit > 0.0);
  const auto p15 = approach_direction(LossModel::pareto(1.5), 2);
  CHECK(p15.direction == Approach::FromAbove);
  CHECK(p15.derivative_limit < 0.0);
  const double g1 = tailconc::gamma(1.0 - 1.0 / 1.5);
  CHECK(p15.derivative_limit ==
        Approx(std::pow(2.0, -0.5) * 1.5 * g1 * g1 / (2.0 * tailconc::gamma(1.0 - 2.0 / 1.5))));
  CHECK(approach_direction(LossModel::pareto(2.0), 2).direction == Approach::ModelDependent);
}

TEST_CASE("crossover") {
  const LossModel gh = LossModel::gandh(0, 1, 2, 0.5);
  const auto star = crossover(gh, 2, 0.99, 0.99999);
  REQUIRE(star.has_value());
  const double bis = oracle::bisect(
      [](double a) {
        return std::sqrt(0.5) * (1.0 + 2.0 * std::log(2.0) / oracle::normal_upper_quantile(1.0 - a)) - 1.0;
      },
      0.99, 0.99999);
  CHECK(std::abs(*star - bis) <= 1e-7);
  CHECK(*star == Approx(oracle::kGandHCrossover).epsilon(1e-12));

  CHECK_FALSE(crossover(LossModel::pareto(0.5), 2, 0.99, 0.999999).has_value());
  CHECK_FALSE(crossover(LossModel::pareto(1.25), 2, 0.9, 0.9999999).has_value());
  CHECK_FALSE(crossover(LossModel::pareto(1.0), 2, 0.9, 0.9999).has_value());
  CHECK_THROWS_AS(crossover(gh, 2, 0.999, 0.99), DomainError);
}
