#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "phantomdr/customer.hpp"
#include "phantomdr/dra.hpp"
#include "phantomdr/verify.hpp"

using namespace phantomdr;
using namespace phantomdr::verify;

TEST_CASE("scalar_maximize") {
  CHECK(scalar_maximize([](double z) { return -(z - 2) * (z - 2); }, 0, 5, 1e-8).argmax ==
        doctest::Approx(2.0).epsilon(1e-7));
  CHECK(scalar_maximize([](double z) { return z - z * z / 2; }, 0, 3).argmax ==
        doctest::Approx(1.0).epsilon(1e-7));
  CHECK(scalar_maximize([](double z) { return 0.5 * z - (z - 2) * (z - 2) / 2; }, 0, 5).argmax ==
        doctest::Approx(2.5).epsilon(1e-7));
  CHECK(scalar_maximize([](double z) { return z; }, 0, 1).at_bound);
  CHECK_THROWS_AS(scalar_maximize([](double z) { return z; }, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(scalar_maximize([](double) { return NAN; }, 0, 1), std::domain_error);
}

TEST_CASE("oracles") {
  CHECK(std::abs(oracle_best_report(LinearBonus{0.5, 1.0}, 1.0, 2.0, 0.0).argmax - 2.5) < 1e-6);
  CHECK(std::abs(oracle_best_report(ConstantBonus{1.0}, 1.0, 0.3, 0.0).argmax - 0.3) < 1e-6);
  CHECK(std::abs(oracle_best_report(CournotBonus{1.1}, 1.0, 0.7, 0.0).argmax - 0.6) < 1e-6);

  const Scenario s = make_symmetric_scenario(1, 1.0);
  CHECK(std::abs(oracle_best_effort(s, {{0.3}, CournotBonus{1.1}}, 0, {}).argmax - 0.4) < 1e-6);
  CHECK(std::abs(oracle_best_effort(s, {{0.2}, LinearBonus{0.5, 1.0}}, 0, {}).argmax - 0.7) < 1e-6);
  CHECK(std::abs(oracle_best_effort(s, {{0.0}, ConstantBonus{1.0}}, 0, {}).argmax) < 1e-6);
}

TEST_CASE("IC checks") {
  CHECK(check_ic_linear(0.5, 1.0, {0.5, 1.0}).passed);
  const CheckReport truthful = check_ic_linear(0.5, 1.0, AffineReport::truthful());
  CHECK_FALSE(truthful.passed);
  CHECK(truthful.residual == doctest::Approx(0.5));
  CHECK_FALSE(check_ic_linear(0.0, 1.0, {0.0, -0.1}).passed);

  const SolvedContract sol = solve_specified(1, 1.0, 0.4);
  StrategyProfile p = sol.profile();
  CHECK(check_ic_cournot(1.1, 1.0, 1, p).passed);
  p.reports[0].intercept += 0.1;
  const CheckReport bad = check_ic_cournot(1.1, 1.0, 1, p);
  CHECK_FALSE(bad.passed);
  CHECK(bad.residual == doctest::Approx(0.3));
  p = sol.profile();
  p.reports[0].slope = -0.2;
  CHECK_FALSE(check_ic_cournot(1.1, 1.0, 1, p).passed);
}

TEST_CASE("Nash check") {
  for (int n : {1, 2}) {
    const double gamma = n == 1 ? 0.4 : 0.8 * gamma_upper_bound(n, 1.0).value;
    const SolvedContract sol = solve_specified(n, 1.0, gamma);
    const Scenario s = specified_scenario(n, 1.0, gamma);
    CHECK(check_nash(s, sol.contract, sol.profile()).passed);

    StrategyProfile moved = sol.profile();
    moved.efforts[0] += 0.1;
    const CheckReport r = check_nash(s, sol.contract, moved);
    CHECK_FALSE(r.passed);
    if (n == 1) {
      // one customer: E[V] is quadratic in effort with curvature C = 5/3
      CHECK(r.residual == doctest::Approx(0.5 * (5.0 / 3.0) * 0.01).epsilon(1e-5));
    }
  }
}

TEST_CASE("individual rationality") {
  const SolvedContract sol = solve_specified(1, 1.0, 0.4);
  const Scenario quiet = without_noise(specified_scenario(1, 1.0, 0.4));
  const auto ir = check_individual_rationality(quiet, sol.contract, sol.profile());
  CHECK(ir[0].passed);
  CHECK(std::stod(ir[0].get("expected_utility")) == doctest::Approx(0.335));

  const Scenario s = make_symmetric_scenario(1, 1.0);
  CHECK(check_individual_rationality(s, {{0.0}, ConstantBonus{0.0}}, {{0.0}, {AffineReport::truthful()}})[0]
            .passed);
  const auto forced =
      check_individual_rationality(s, {{0.0}, ConstantBonus{0.0}}, {{1.0}, {AffineReport::truthful()}});
  CHECK_FALSE(forced[0].passed);
  CHECK(forced[0].residual == doctest::Approx(-0.5));
}

TEST_CASE("diagnostics") {
  const CheckReport gap = constrained_search_diagnostic(1, 1.0, 0.4);
  CHECK(gap.diagnostic);
  CHECK(std::stod(gap.get("equilibrium_alpha")) == doctest::Approx(0.3));
  CHECK_THROWS_WITH_AS(constrained_search_diagnostic(1, 1.0, 0.6), "gamma exceeds bound",
                       std::domain_error);
  CHECK(me_coefficient_diagnostic(0.4, 0.05).diagnostic);
}

TEST_CASE("degenerate contract demos") {
  const auto demos = demo_degenerate_contracts();
  REQUIRE(demos.size() == 3);
  for (const auto& d : demos) CHECK_MESSAGE(d.passed, d.name);
  CHECK(std::stod(demos[1].get("report")) == doctest::Approx(101.0).epsilon(1e-6));
  CHECK(demos[1].get("default_bounds_at_bound") == "true");
  CHECK(std::stod(demos[2].get("required_sum_alpha")) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("suite passes on solver outputs") {
  for (int n : {1, 3}) {
    const double gamma = 0.5 * gamma_upper_bound(n, 2.0).value;
    const auto checks = run_suite(specified_scenario(n, 2.0, gamma), solve_specified(n, 2.0, gamma));
    for (const auto& c : checks) CHECK_MESSAGE(c.passed, c.name);
  }
  const auto linear = run_suite(make_symmetric_scenario(2, 0.25), solve_unspecified(2, 0.25, 1.0));
  for (const auto& c : linear) CHECK_MESSAGE(c.passed, c.name);
}

TEST_CASE("linear-bonus optimum breaks participation once r0^2 beta > 1/3") {
  // E[V] = 1/8 - 3 r0^2 beta / 8
  for (double beta : {0.25, 0.5, 0.9}) {
    const SolvedContract sol = solve_unspecified(1, beta, 1.0);
    const auto ir = check_individual_rationality(make_symmetric_scenario(1, beta), sol.contract,
                                                 sol.profile());
    CHECK(std::stod(ir[0].get("expected_utility")) == doctest::Approx(0.125 - 0.375 * beta));
    CHECK(ir[0].passed == (beta <= 1.0 / 3.0));
  }
}
