#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "phantomdr/dra.hpp"
#include "phantomdr/model.hpp"

namespace phantomdr::verify {

/// Outcome of a single check. `passed` is exactly |residual| <= tolerance.
/// Diagnostics are informational and never gate anything.
struct CheckReport {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::vector<std::pair<std::string, std::string>> context;
  bool diagnostic = false;

  std::string get(const std::string& key) const;
};

CheckReport make_report(std::string name, double residual, double tolerance);

struct Bounds {
  double lo;
  double hi;
};

inline constexpr Bounds kReportBounds{-10.0, 10.0};
inline constexpr Bounds kEffortBounds{0.0, 10.0};
inline constexpr double kSearchTolerance = 1e-9;

struct Maximum {
  double argmax = 0.0;
  double value = 0.0;
  bool at_bound = false;  // argmax sits on lo or hi
};

/// Grid bracketing with `grid_points` samples, then golden-section refinement
/// to width `tol`. Throws std::invalid_argument for lo >= hi and
/// std::domain_error when f returns a non-finite value.
Maximum scalar_maximize(const std::function<double(double)>& f, double lo, double hi,
                        double tol = kSearchTolerance, int grid_points = 200);

/// Derivative-free maximizer of E[B(R)] - beta (R - x)^2 / 2.
Maximum oracle_best_report(const BonusRule& bonus, double beta, double x, double others_sum,
                           Bounds bounds = kReportBounds);

/// Derivative-free best effort for customer `i`. Every candidate effort is
/// scored with the closed-form E[V_i]; report rules are fitted from
/// oracle_best_report, and under the shared bonus the other customers'
/// expected reports are re-equilibrated for the candidate effort vector.
/// `others_efforts` lists the n - 1 efforts of the other customers in order.
Maximum oracle_best_effort(const Scenario& s, const Contract& k, std::size_t i,
                           const std::vector<double>& others_efforts,
                           Bounds bounds = kEffortBounds);

/// Reporting-stage equilibrium for fixed efforts, built from oracle-fitted
/// report rules and a direct linear solve (no closed-form equilibrium terms).
std::vector<AffineReport> oracle_reporting_equilibrium(const Scenario& s, const Contract& k,
                                                       const std::vector<double>& efforts);

/// |mu - beta (R(x) - x)| over sampled x, plus the slope >= 0 condition.
CheckReport check_ic_linear(double mu, double beta, const AffineReport& rule);

/// Residual of lambda + beta x_i - (beta + 2) R_i(x_i) - sum_{j!=i} E[R_j] over
/// sampled x_i and every customer, plus the slope >= 0 condition.
CheckReport check_ic_cournot(double lambda, double beta, int n, const StrategyProfile& p,
                             double m_e = 0.0);

/// Largest unilateral gain in E[V_i] over the report intercept (efforts and
/// other rules fixed) and over effort (reporting stage re-equilibrated).
CheckReport check_nash(const Scenario& s, const Contract& k, const StrategyProfile& p,
                       double epsilon = 1e-6);

/// One report per customer with residual min(0, E[V_i]).
std::vector<CheckReport> check_individual_rationality(const Scenario& s, const Contract& k,
                                                      const StrategyProfile& p);

/// |beta (R* - x) - dE[B]/dR at R*| for the closed-form optimal report.
CheckReport check_report_foc(const BonusRule& bonus, double beta, double x, double others_sum,
                             double tolerance = 1e-10);

/// Searches alpha in [0, 1/N) with lambda pinned by the reduction target and
/// compares the best E[Pi] with the equilibrium contract's. Throws
/// std::domain_error("gamma exceeds bound") for an infeasible target.
CheckReport constrained_search_diagnostic(int n, double beta, double gamma);

/// Re-derives the aggregator's share condition with a realization-error mean
/// by differentiating E[Pi] in alpha (lambda held fixed, effort responding)
/// and reports it at the extension's contract.
CheckReport me_coefficient_diagnostic(double gamma, double m_e);

/// Constant-bonus moral hazard, linear-bonus report explosion, and the
/// truthful-first-best impossibility witness.
std::vector<CheckReport> demo_degenerate_contracts();

/// Every non-diagnostic check on a solved contract for the given scenario.
std::vector<CheckReport> run_suite(const Scenario& s, const SolvedContract& solved,
                                   double epsilon = 1e-6);

}  // namespace phantomdr::verify
