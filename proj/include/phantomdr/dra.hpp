#pragma once

#include <string>
#include <vector>

#include "phantomdr/model.hpp"
#include "phantomdr/nash.hpp"

namespace phantomdr {

struct NamedResidual {
  std::string name;
  double value = 0.0;
};

/// A contract together with the customer behaviour it induces.
struct SolvedContract {
  Contract contract;
  std::vector<double> predicted_efforts;
  std::vector<AffineReport> predicted_reports;
  bool feasible = false;
  std::vector<NamedResidual> diagnostics;
  std::vector<std::string> infeasibility;  // reasons; empty iff feasible

  double share() const { return contract.shares.empty() ? 0.0 : contract.shares.front(); }
  double effort() const {
    return predicted_efforts.empty() ? 0.0 : predicted_efforts.front();
  }
  /// lambda for the shared bonus, mu for the linear one, c for a constant one.
  double bonus_parameter() const;
  StrategyProfile profile() const { return {predicted_efforts, predicted_reports}; }
  double diagnostic(const std::string& name) const;
};

/// Benchmark when the aggregator observes the true reduction.
struct FirstBest {
  double effort = 1.0;                   // argmax_a a - a^2/2
  std::vector<double> expected_payments;  // per customer: m_e + h(a)
  double dra_utility = 0.0;
  std::string payment_rule;
};

FirstBest first_best(const Scenario& s);

/// Linear-bonus optimum without a reduction target: mu* = r0 beta / 2,
/// alpha* = 0.5 - mu*, effort 0.5 per customer.
SolvedContract solve_unspecified(int n, double beta, double r0);

struct GammaBound {
  double value = 0.0;  // +inf when unbounded
  bool bounded = true;
};

/// Largest target reduction with a nonnegative optimal share.
GammaBound gamma_upper_bound(int n, double beta);

/// Shared-bonus equilibrium contract hitting an expected total reduction of
/// `gamma`. Throws std::domain_error if the defining 2x2 system is singular.
SolvedContract solve_specified(int n, double beta, double gamma);

/// Single customer, beta = 1, realization error with mean `m_e`.
SolvedContract solve_me_extension(double gamma, double m_e);

/// Single customer, beta = 1, aggregator's profit estimate biased by `m_n`.
SolvedContract solve_mn_extension(double gamma, double m_n);

/// Scenario matching a solver's hypotheses, for evaluating utilities.
Scenario specified_scenario(int n, double beta, double gamma, NoiseModel noise = {},
                            double m_n = 0.0);

}  // namespace phantomdr
