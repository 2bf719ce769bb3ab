#pragma once

#include <span>
#include <vector>

#include "phantomdr/model.hpp"

namespace phantomdr {

/// dE[B]/dR evaluated at `report`, with the other customers' expected reports
/// summing to `others_sum` (only the shared bonus depends on it).
double bonus_marginal(const BonusRule& bonus, double report, double others_sum);

/// Report maximizing E[B(R)] - beta (R - x)^2 / 2. Throws std::invalid_argument
/// for beta <= 0.
double optimal_report(const BonusRule& bonus, double beta, double x, double others_sum);

/// The same maximizer written as a rule in x.
AffineReport optimal_report_rule(const BonusRule& bonus, double beta, double others_sum);

/// Best effort of one customer given the others' efforts.
///
/// Constant bonus: a = alpha_i. Linear bonus: a = mu + alpha_i. Shared (Cournot)
/// bonus: the customer anticipates that the reporting stage re-equilibrates
/// around its own effort, so a_i = (alpha_i + A lambda - B sum_{j!=i} E[x_j]
/// - (C - 1) m_e) / C, with m_e the mean realization error from `params`.
/// `others_efforts` must hold n - 1 entries for the shared bonus. The result is
/// the stationary point and is not clipped at zero.
double optimal_effort(const BonusRule& bonus, const CustomerParams& params, double alpha_i,
                      std::span<const double> others_efforts, int n);

/// Joint solution of the shared-bonus effort equations for arbitrary shares
/// (common beta and m_e). Exact, no iteration.
std::vector<double> cournot_equilibrium_efforts(double lambda, double beta,
                                                std::span<const double> shares, double m_e);

/// Efforts and affine report rules that are mutual best responses under `k`.
/// Throws std::invalid_argument for the shared bonus with heterogeneous beta
/// or heterogeneous noise means.
StrategyProfile symmetric_best_response_profile(const Scenario& s, const Contract& k);

/// E[R_i - x_i] = intercept + (slope - 1) E[x_i].
std::vector<double> expected_falsification(const StrategyProfile& p, const Scenario& s);

}  // namespace phantomdr
