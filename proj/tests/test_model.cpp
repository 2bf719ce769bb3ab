#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "phantomdr/customer.hpp"
#include "phantomdr/model.hpp"

using namespace phantomdr;

namespace {

bool has_message(const std::vector<std::string>& msgs, const std::string& m) {
  return std::find(msgs.begin(), msgs.end(), m) != msgs.end();
}

}  // namespace

TEST_CASE("bonus payments") {
  const std::vector<double> reports{0.5, 0.25};
  CHECK(bonus_payment(ConstantBonus{2.0}, 0, reports) == doctest::Approx(2.0));
  CHECK(bonus_payment(LinearBonus{0.5, 1.0}, 0, reports) == doctest::Approx(-0.25));
  // R_i (lambda - sum R)
  CHECK(bonus_payment(CournotBonus{1.0}, 1, reports) == doctest::Approx(0.25 * 0.25));
  CHECK(bonus_name(CournotBonus{}) == "cournot");
}

TEST_CASE("validate_scenario reports each broken invariant") {
  Scenario s = make_symmetric_scenario(2, 1.0);
  Contract ok{{0.2, 0.2}, CournotBonus{1.0}};
  CHECK(validate_scenario(s, ok).empty());

  SUBCASE("shares summing to one") {
    Contract k{{0.5, 0.5}, CournotBonus{1.0}};
    CHECK(has_message(validate_scenario(s, k), "sum of shares ≥ 1"));
  }
  SUBCASE("negative share and negative beta") {
    s.customers[1].beta = -1.0;
    Contract k{{-0.1, 0.2}, ConstantBonus{-1.0}};
    const auto msgs = validate_scenario(s, k);
    CHECK(has_message(msgs, "share < 0 (customer 0)"));
    CHECK(has_message(msgs, "beta <= 0 (customer 1)"));
    CHECK(has_message(msgs, "c < 0"));
  }
  SUBCASE("length mismatch") {
    Contract k{{0.1}, LinearBonus{0.1, 1.0}};
    CHECK(has_message(validate_scenario(s, k), "shares list length != n_customers"));
  }
  SUBCASE("nonpositive gamma") {
    s.gamma = 0.0;
    CHECK(has_message(validate_scenario(s, ok), "gamma <= 0"));
  }
}

TEST_CASE("closed-form utilities at the single-customer equilibrium") {
  // alpha = 0.3, lambda = 1.1, effort 0.4, R(x) = (1.1 + x)/3
  const Scenario s = without_noise(make_symmetric_scenario(1, 1.0));
  const Contract k{{0.3}, CournotBonus{1.1}};
  const StrategyProfile p{{0.4}, {{1.1 / 3.0, 1.0 / 3.0}}};
  CHECK(dra_expected_utility(s, k, p) == doctest::Approx(-0.02).epsilon(1e-12));
  CHECK(customer_expected_utility(s, k, p, 0) == doctest::Approx(0.335).epsilon(1e-12));

  SUBCASE("noise variance enters through the bonus") {
    const Scenario noisy = make_symmetric_scenario(1, 1.0, NoiseModel{NoiseFamily::gaussian, 0.0, 0.1});
    // E[Pi] = (1-a)a - (2 lambda^2 + lambda a - a^2 - sigma^2)/9
    CHECK(dra_expected_utility(noisy, k, p) == doctest::Approx(-0.02 + 0.01 / 9.0).epsilon(1e-12));
  }
}

TEST_CASE("linear bonus utility") {
  const Scenario s = make_symmetric_scenario(1, 1.0);
  const Contract k{{0.0}, LinearBonus{0.5, 1.0}};
  const StrategyProfile p{{0.5}, {{0.5, 1.0}}};
  CHECK(dra_expected_utility(s, k, p) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("trivial contract gives zero everywhere") {
  const Scenario s = make_symmetric_scenario(1, 1.0);
  const Contract k{{0.0}, ConstantBonus{0.0}};
  const StrategyProfile p{{0.0}, {AffineReport::truthful()}};
  const ExpectedOutcome o = expected_outcome(s, k, p);
  CHECK(o.dra_utility == doctest::Approx(0.0));
  CHECK(o.customer_utilities[0] == doctest::Approx(0.0));
  CHECK(o.expected_falsification[0] == doctest::Approx(0.0));
}

TEST_CASE("profit identity: E[Pi] = sum E[x] - sum E[P]") {
  for (int n : {1, 3}) {
    for (double m_n : {0.0, 0.07}) {
      const Scenario s =
          make_symmetric_scenario(n, 0.7, NoiseModel{NoiseFamily::uniform, 0.05, 0.2}, 0.5, m_n);
      std::vector<double> shares(n, 0.1);
      const Contract k{shares, CournotBonus{1.3}};
      const StrategyProfile p = symmetric_best_response_profile(s, k);
      const ExpectedOutcome o = expected_outcome(s, k, p);
      double paid = 0.0;
      for (double v : o.expected_payments) paid += v;
      CHECK(o.dra_utility == doctest::Approx(o.expected_estimated_reduction - paid).epsilon(1e-12));
      if (m_n == 0.0) CHECK(o.expected_estimated_reduction == doctest::Approx(o.expected_total_reduction));
    }
  }
}

TEST_CASE("shape mismatch throws") {
  const Scenario s = make_symmetric_scenario(2, 1.0);
  const Contract k{{0.1, 0.1}, ConstantBonus{0.0}};
  const StrategyProfile p{{0.0}, {AffineReport::truthful()}};
  CHECK_THROWS_AS(check_shapes(s, k, p), std::invalid_argument);
  CHECK_THROWS_AS(dra_expected_utility(s, k, p), std::invalid_argument);
}
