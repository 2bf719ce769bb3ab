#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "phantomdr/customer.hpp"
#include "phantomdr/dra.hpp"
#include "phantomdr/nash.hpp"

using namespace phantomdr;

TEST_CASE("first best") {
  auto fb = first_best(make_symmetric_scenario(1, 1.0));
  CHECK(fb.effort == doctest::Approx(1.0));
  CHECK(fb.dra_utility == doctest::Approx(0.5));
  CHECK(fb.expected_payments[0] == doctest::Approx(0.5));
  CHECK(first_best(make_symmetric_scenario(4, 1.0)).dra_utility == doctest::Approx(2.0));
  fb = first_best(make_symmetric_scenario(1, 1.0, NoiseModel{NoiseFamily::gaussian, 0.5, 0.1}));
  CHECK(fb.effort == doctest::Approx(1.0));
  // the payment reimburses the mean error, so profit stays a - h(a)
  CHECK(fb.expected_payments[0] == doctest::Approx(1.0));
  CHECK(fb.dra_utility == doctest::Approx(0.5));
}

TEST_CASE("unspecified target") {
  SolvedContract s = solve_unspecified(1, 1.0, 1.0);
  CHECK(s.feasible);
  CHECK(s.bonus_parameter() == doctest::Approx(0.5));
  CHECK(s.share() == doctest::Approx(0.0));
  CHECK(s.effort() == doctest::Approx(0.5));

  s = solve_unspecified(1, 0.5, 1.0);
  CHECK(s.bonus_parameter() == doctest::Approx(0.25));
  CHECK(s.share() == doctest::Approx(0.25));
  const Scenario sc = make_symmetric_scenario(1, 0.5);
  CHECK(dra_expected_utility(sc, s.contract, s.profile()) == doctest::Approx(0.375));

  s = solve_unspecified(1, 3.0, 1.0);
  CHECK_FALSE(s.feasible);
  CHECK(s.share() == doctest::Approx(-1.0));

  CHECK_FALSE(solve_unspecified(5, 0.5, 1.0).feasible);  // 5 * 0.25 >= 1
}

TEST_CASE("gamma bound") {
  CHECK(gamma_upper_bound(1, 1.0).value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gamma_upper_bound(1, 1.0).bounded);
  for (int n = 1; n <= 50; ++n)
    for (double beta = 0.05; beta <= 10.0; beta += 0.05)
      CHECK(nash_constants(n, beta).remark_denominator() >= 0.0);
}

TEST_CASE("specified target") {
  const SolvedContract s = solve_specified(1, 1.0, 0.4);
  CHECK(s.feasible);
  CHECK(s.share() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(s.bonus_parameter() == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(s.effort() == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(s.predicted_reports[0].intercept == doctest::Approx(1.1 / 3.0));
  CHECK(s.predicted_reports[0].slope == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(s.diagnostic("share_equation_residual")) < 1e-10);
  CHECK(std::abs(s.diagnostic("bonus_equation_residual")) < 1e-10);

  const SolvedContract over = solve_specified(1, 1.0, 0.6);
  CHECK_FALSE(over.feasible);
  CHECK_FALSE(over.infeasibility.empty());
  CHECK_THROWS_AS(solve_specified(1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("reduction target is met and share decreases in gamma") {
  for (int n : {1, 2, 3, 5, 8}) {
    for (double beta : {0.5, 1.0, 2.0}) {
      const double bound = gamma_upper_bound(n, beta).value;
      double prev_alpha = INFINITY;
      for (double f = 0.1; f <= 1.0; f += 0.1) {
        const SolvedContract s = solve_specified(n, beta, f * bound);
        CHECK(std::abs(n * s.effort() - f * bound) < 1e-12);
        CHECK(s.share() <= prev_alpha);
        prev_alpha = s.share();
      }
      CHECK(solve_specified(n, beta, 1.1 * bound).share() < 0.0);
    }
  }
}

TEST_CASE("extensions") {
  SUBCASE("realization-error mean") {
    const SolvedContract s = solve_me_extension(0.4, 0.05);
    CHECK(s.share() == doctest::Approx(0.433).epsilon(1e-3));
    CHECK(s.bonus_parameter() == doctest::Approx(0.551).epsilon(1e-3));
    CHECK(s.effort() == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(s.predicted_reports[0].slope == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("estimation-error mean") {
    const SolvedContract s = solve_mn_extension(0.4, 0.1);
    CHECK(s.share() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(s.bonus_parameter() == doctest::Approx(1.85).epsilon(1e-12));
    CHECK(s.effort() == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("both reduce to the base model at zero error") {
    for (double g : {0.1, 0.2, 0.3, 0.4, 0.45}) {
      const SolvedContract a = solve_specified(1, 1.0, g);
      for (const SolvedContract& b : {solve_me_extension(g, 0.0), solve_mn_extension(g, 0.0)}) {
        CHECK(std::abs(a.share() - b.share()) < 1e-9);
        CHECK(std::abs(a.bonus_parameter() - b.bonus_parameter()) < 1e-9);
        CHECK(std::abs(a.effort() - b.effort()) < 1e-9);
      }
    }
  }
}

TEST_CASE("solution does not depend on noise") {
  const SolvedContract s = solve_specified(3, 1.5, 1.0);
  for (double sigma : {0.0, 0.3}) {
    const Scenario sc = specified_scenario(3, 1.5, 1.0, NoiseModel{NoiseFamily::gaussian, 0.0, sigma});
    const StrategyProfile p = symmetric_best_response_profile(sc, s.contract);
    CHECK(p.efforts[0] == doctest::Approx(s.effort()).epsilon(1e-12));
    CHECK(p.reports[0].intercept == doctest::Approx(s.predicted_reports[0].intercept).epsilon(1e-12));
  }
}
