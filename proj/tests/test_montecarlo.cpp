#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "phantomdr/customer.hpp"
#include "phantomdr/dra.hpp"
#include "phantomdr/montecarlo.hpp"

using namespace phantomdr;
using namespace phantomdr::mc;

namespace {

void check_within(const Estimate& e, double closed, double k) {
  CHECK_MESSAGE(std::abs(e.mean - closed) <= k * e.se + 1e-12,
                "mc=" << e.mean << " closed=" << closed << " se=" << e.se);
}

}  // namespace

TEST_CASE("noise-free runs reproduce the closed form") {
  const SolvedContract sol = solve_specified(2, 1.0, 1.0);
  const Scenario s = without_noise(specified_scenario(2, 1.0, 1.0));
  const ExpectedOutcome o = expected_outcome(s, sol.contract, sol.profile());
  const SimStats st = simulate(s, sol.contract, sol.profile(), {.n_reps = 1000, .master_seed = 3});
  CHECK(std::abs(st.dra_utility.mean - o.dra_utility) < 1e-10);
  CHECK(std::abs(st.customer_utility[1].mean - o.customer_utilities[1]) < 1e-10);
  CHECK(st.dra_utility.count == 1000);
}

TEST_CASE("means agree with closed forms for both noise families") {
  for (NoiseFamily fam : {NoiseFamily::gaussian, NoiseFamily::uniform}) {
    const SolvedContract sol = solve_mn_extension(0.4, 0.05);
    const Scenario s = specified_scenario(1, 1.0, 0.4, NoiseModel{fam, 0.0, 0.2}, 0.05);
    const ExpectedOutcome o = expected_outcome(s, sol.contract, sol.profile());
    const SimStats st = simulate(s, sol.contract, sol.profile(), {.n_reps = 200000, .master_seed = 11});
    check_within(st.dra_utility, o.dra_utility, 4.0);
    check_within(st.customer_utility[0], o.customer_utilities[0], 4.0);
    check_within(st.falsification[0], o.expected_falsification[0], 4.0);
    check_within(st.payment[0], o.expected_payments[0], 4.0);
    check_within(st.total_reduction, o.expected_total_reduction, 4.0);
  }
}

TEST_CASE("determinism across worker counts") {
  const SolvedContract sol = solve_specified(3, 1.0, 2.0);
  const Scenario s = specified_scenario(3, 1.0, 2.0);
  SimConfig a{.n_reps = 50001, .master_seed = 42, .workers = 1};
  SimConfig b = a;
  b.workers = 7;
  const SimStats x = simulate(s, sol.contract, sol.profile(), a);
  const SimStats y = simulate(s, sol.contract, sol.profile(), b);
  CHECK(x.dra_utility.mean == y.dra_utility.mean);
  CHECK(x.dra_utility.se == y.dra_utility.se);
  CHECK(x.customer_utility[2].mean == y.customer_utility[2].mean);
  CHECK(stream_seed(1, 2, 3) != stream_seed(1, 3, 2));
}

TEST_CASE("antithetic draws cut the linear-bonus standard error") {
  const SolvedContract sol = solve_unspecified(1, 0.5, 1.0);
  const Scenario s = make_symmetric_scenario(1, 0.5);
  const SimStats plain = simulate(s, sol.contract, sol.profile(), {.n_reps = 20000, .master_seed = 5});
  const SimStats anti =
      simulate(s, sol.contract, sol.profile(), {.n_reps = 20000, .master_seed = 5, .antithetic = true});
  CHECK(anti.dra_utility.se <= 0.5 * plain.dra_utility.se);
  CHECK_THROWS_AS(
      simulate(s, sol.contract, sol.profile(), {.n_reps = 3, .master_seed = 5, .antithetic = true}),
      std::invalid_argument);
}

TEST_CASE("invalid inputs") {
  const SolvedContract sol = solve_specified(1, 1.0, 0.4);
  const Scenario s = specified_scenario(1, 1.0, 0.4);
  CHECK_THROWS_AS(simulate(s, sol.contract, sol.profile(), {.n_reps = 0}), std::invalid_argument);
  Contract bad = sol.contract;
  bad.shares[0] = 1.5;
  CHECK_THROWS_AS(simulate(s, bad, sol.profile(), {.n_reps = 10}), std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep_kind("fig9"), std::invalid_argument);
  CHECK(parse_sweep_kind("fig4b") == SweepKind::fig4b_mn);
}

TEST_CASE("sweeps") {
  const SimConfig cfg{.n_reps = 2000, .master_seed = 1};
  SUBCASE("fig2: utility linear in N") {
    GridSpec g;
    g.betas = {0.25, 0.5, 0.75};
    g.ns = {1, 2, 3};
    const auto rows = sweep(SweepKind::fig2_beta_N, g, cfg);
    REQUIRE(rows.size() == 9);
    for (std::size_t b = 0; b < 3; ++b) {
      const double per = rows[3 * b].closed.dra_utility;
      for (std::size_t k = 0; k < 3; ++k)
        CHECK(rows[3 * b + k].closed.dra_utility == doctest::Approx((k + 1) * per).epsilon(1e-12));
    }
  }
  SUBCASE("fig3: utility changes sign across targets at one customer") {
    GridSpec g;
    g.gammas = {0.3, 0.4};
    g.ns = {1, 2, 3};
    const auto rows = sweep(SweepKind::fig3_gamma_N, g, cfg);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].closed.dra_utility > 0.0);
    CHECK(rows[3].closed.dra_utility < 0.0);
    CHECK(rows[3].e_pi_closed_sigma0 == doctest::Approx(-0.02));
    CHECK_FALSE(rows[4].solved.feasible);
    CHECK_FALSE(rows[4].stats.has_value());
    for (const auto& r : rows)
      if (r.stats) check_within(r.stats->dra_utility, r.closed.dra_utility, 4.0);
  }
  SUBCASE("fig4b: payment grows with the estimation bias") {
    GridSpec g;
    g.gammas = {0.4};
    g.error_means = {0.0, 0.05, 0.1};
    const auto rows = sweep(SweepKind::fig4b_mn, g, cfg);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].closed.expected_payments[0] > rows[0].closed.expected_payments[0]);
    CHECK(rows[2].closed.expected_payments[0] > rows[1].closed.expected_payments[0]);
  }
}
