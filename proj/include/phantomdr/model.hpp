#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace phantomdr {

enum class NoiseFamily { gaussian, uniform };

/// Realization error e_i in x_i = a_i + e_i. Only the mean and variance enter
/// the closed forms; the family matters for sampling alone.
struct NoiseModel {
  NoiseFamily family = NoiseFamily::gaussian;
  double mean = 0.0;
  double std = 0.1;

  double variance() const { return std * std; }
  /// Half-width of the uniform interval with this standard deviation.
  double uniform_half_width() const;
};

struct CustomerParams {
  double beta = 1.0;  // falsification-cost weight
  NoiseModel noise;
};

struct Scenario {
  int n_customers = 1;
  std::vector<CustomerParams> customers;
  std::optional<double> gamma;  // target total expected reduction
  double m_n = 0.0;             // mean of the aggregator's estimation error

  std::size_t size() const { return customers.size(); }
};

/// N identical customers.
Scenario make_symmetric_scenario(int n, double beta, NoiseModel noise = {},
                                 std::optional<double> gamma = std::nullopt,
                                 double m_n = 0.0);

struct ConstantBonus {
  double c = 0.0;
};

/// B(R) = mu (R - r0)
struct LinearBonus {
  double mu = 0.0;
  double r0 = 0.0;
};

/// B_i(R) = R_i (lambda - sum_j R_j)
struct CournotBonus {
  double lambda = 0.0;
};

using BonusRule = std::variant<ConstantBonus, LinearBonus, CournotBonus>;

std::string bonus_name(const BonusRule& bonus);

struct Contract {
  std::vector<double> shares;  // alpha_i
  BonusRule bonus;
};

/// R(x) = intercept + slope * x
struct AffineReport {
  double intercept = 0.0;
  double slope = 1.0;

  double operator()(double x) const { return intercept + slope * x; }
  static AffineReport truthful() { return {0.0, 1.0}; }
};

struct StrategyProfile {
  std::vector<double> efforts;
  std::vector<AffineReport> reports;
};

struct ExpectedOutcome {
  std::vector<double> customer_utilities;
  double dra_utility = 0.0;
  std::vector<double> expected_falsification;
  double expected_total_reduction = 0.0;
  /// Sum of E[y_i] with y_i = x_i + n_i; equals the true reduction when m_n = 0.
  double expected_estimated_reduction = 0.0;
  std::vector<double> expected_payments;
};

// Cost functions are fixed: every closed form in the library depends on them.
inline double effort_cost(double effort) { return 0.5 * effort * effort; }
inline double falsification_cost(double beta, double falsification) {
  return 0.5 * beta * falsification * falsification;
}

/// Bonus paid to customer `i` for a realized report vector.
double bonus_payment(const BonusRule& bonus, std::size_t i,
                     const std::vector<double>& reports);

/// Returns one message per broken invariant; empty when everything holds.
std::vector<std::string> validate_scenario(const Scenario& s, const Contract& k);

/// Throws std::invalid_argument when list lengths disagree with the scenario.
void check_shapes(const Scenario& s, const Contract& k, const StrategyProfile& p);

double customer_expected_utility(const Scenario& s, const Contract& k,
                                 const StrategyProfile& p, std::size_t i);

double dra_expected_utility(const Scenario& s, const Contract& k,
                            const StrategyProfile& p);

ExpectedOutcome expected_outcome(const Scenario& s, const Contract& k,
                                 const StrategyProfile& p);

/// Same scenario with every customer's noise standard deviation set to zero.
Scenario without_noise(Scenario s);

}  // namespace phantomdr
