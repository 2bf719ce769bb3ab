#include "phantomdr/dra.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/core.h>

#include "phantomdr/customer.hpp"
#include "phantomdr/detail/overloaded.hpp"

namespace phantomdr {

using detail::overloaded;

namespace {

// Both single-customer extensions reduce to
//   14 alpha + 3 lambda = share_rhs
//    3 alpha +   lambda = bonus_rhs
// whose determinant is 5.
void solve_single_customer_pair(double share_rhs, double bonus_rhs, double& alpha,
                                double& lambda) {
  alpha = (share_rhs - 3.0 * bonus_rhs) / 5.0;
  lambda = (14.0 * bonus_rhs - 3.0 * share_rhs) / 5.0;
}

void finish_single_customer(SolvedContract& out, double alpha, double lambda, double effort) {
  out.contract.shares = {alpha};
  out.contract.bonus = CournotBonus{lambda};
  out.predicted_efforts = {effort};
  // Report rule (lambda + x) / 3 does not depend on either error mean.
  out.predicted_reports = {optimal_report_rule(CournotBonus{lambda}, 1.0, 0.0)};
  if (!(alpha >= 0.0)) out.infeasibility.emplace_back("alpha* < 0");
  if (!(alpha < 1.0)) out.infeasibility.emplace_back("N alpha* >= 1");
  out.feasible = out.infeasibility.empty();
}

}  // namespace

double SolvedContract::bonus_parameter() const {
  return std::visit(overloaded{
                        [](const ConstantBonus& b) { return b.c; },
                        [](const LinearBonus& b) { return b.mu; },
                        [](const CournotBonus& b) { return b.lambda; },
                    },
                    contract.bonus);
}

double SolvedContract::diagnostic(const std::string& name) const {
  for (const auto& d : diagnostics)
    if (d.name == name) return d.value;
  throw std::out_of_range("no diagnostic named " + name);
}

Scenario specified_scenario(int n, double beta, double gamma, NoiseModel noise, double m_n) {
  return make_symmetric_scenario(n, beta, noise, gamma, m_n);
}

FirstBest first_best(const Scenario& s) {
  FirstBest fb;
  fb.effort = 1.0;
  fb.payment_rule = "P_i = x_i - a* + h(a*)";
  for (const auto& c : s.customers) {
    const double payment = c.noise.mean + effort_cost(fb.effort);
    fb.expected_payments.push_back(payment);
    fb.dra_utility += fb.effort + c.noise.mean - payment;
  }
  return fb;
}

SolvedContract solve_unspecified(int n, double beta, double r0) {
  if (n < 1 || !(beta > 0.0) || !(r0 >= 0.0)) {
    throw std::invalid_argument(
        fmt::format("solve_unspecified: need n >= 1, beta > 0, r0 >= 0 (n={} beta={} r0={})", n,
                    beta, r0));
  }
  const double mu = r0 * beta / 2.0;
  const double alpha = 0.5 - mu;
  const LinearBonus bonus{mu, r0};

  SolvedContract out;
  out.contract.shares.assign(n, alpha);
  out.contract.bonus = bonus;
  out.predicted_efforts.assign(n, mu + alpha);
  out.predicted_reports.assign(n, optimal_report_rule(bonus, beta, 0.0));

  out.diagnostics.push_back({"share_equation_residual", alpha - (0.5 - mu)});
  out.diagnostics.push_back(
      {"bonus_equation_residual", mu - (0.5 - alpha + r0 / 2.0) / (1.0 + 1.0 / beta)});
  out.diagnostics.push_back({"ic_linear_residual",
                             mu - beta * (out.predicted_reports[0](0.0) - 0.0)});

  if (!(alpha >= 0.0)) out.infeasibility.emplace_back("alpha* < 0 (r0 beta > 1)");
  if (!(n * alpha < 1.0)) out.infeasibility.emplace_back("N alpha* >= 1");
  out.feasible = out.infeasibility.empty();
  return out;
}

GammaBound gamma_upper_bound(int n, double beta) {
  const NashConstants k = nash_constants(n, beta);
  const double denom = k.effort_denominator() * k.share_lambda_coefficient();
  if (!(denom > 0.0)) return {std::numeric_limits<double>::infinity(), false};
  return {n * k.a_c / denom, true};
}

SolvedContract solve_specified(int n, double beta, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("solve_specified: gamma must be > 0");
  const NashConstants k = nash_constants(n, beta);
  const double nn = n;
  const double q = k.effort_denominator();
  const double slope = k.share_lambda_coefficient();

  //  2(1 - ND) alpha + slope lambda = 1
  //  N alpha + N A lambda           = q gamma
  const double a11 = 2.0 * (1.0 - nn * k.d_c), a12 = slope;
  const double a21 = nn, a22 = nn * k.a_c;
  const double det = a11 * a22 - a12 * a21;
  if (std::abs(det) < 1e-12) {
    throw std::domain_error(fmt::format(
        "solve_specified: singular equilibrium system at (N={}, beta={}, gamma={})", n, beta,
        gamma));
  }
  const double alpha = (1.0 * a22 - a12 * q * gamma) / det;
  const double lambda = (a11 * q * gamma - a21 * 1.0) / det;

  SolvedContract out;
  out.contract.shares.assign(n, alpha);
  out.contract.bonus = CournotBonus{lambda};
  const StrategyProfile p =
      symmetric_best_response_profile(specified_scenario(n, beta, gamma), out.contract);
  out.predicted_efforts = p.efforts;
  out.predicted_reports = p.reports;

  double total_effort = 0.0;
  for (double a : p.efforts) total_effort += a;
  out.diagnostics.push_back(
      {"share_equation_residual",
       alpha - (1.0 - lambda * slope) / (2.0 * (1.0 - nn * k.d_c))});
  out.diagnostics.push_back(
      {"bonus_equation_residual", lambda - (q * gamma - nn * alpha) / (nn * k.a_c)});
  out.diagnostics.push_back({"total_reduction_residual", total_effort - gamma});

  const GammaBound bound = gamma_upper_bound(n, beta);
  out.diagnostics.push_back({"gamma_upper_bound", bound.value});
  if (!(alpha >= 0.0)) out.infeasibility.emplace_back("alpha* < 0");
  if (!(nn * alpha < 1.0)) out.infeasibility.emplace_back("N alpha* >= 1");
  if (bound.bounded && gamma > bound.value) out.infeasibility.emplace_back("gamma exceeds bound");
  out.feasible = out.infeasibility.empty();
  return out;
}

SolvedContract solve_me_extension(double gamma, double m_e) {
  if (!(gamma > 0.0)) throw std::invalid_argument("solve_me_extension: gamma must be > 0");
  // alpha = (7.5 - 3 lambda + 4.3 m_e) / 14,  lambda = 5 gamma - 3 (alpha + m_e)
  double alpha = 0.0, lambda = 0.0;
  solve_single_customer_pair(7.5 + 4.3 * m_e, 5.0 * gamma - 3.0 * m_e, alpha, lambda);
  const double effort = (3.0 * alpha + lambda - 2.0 * m_e) / 5.0;

  SolvedContract out;
  finish_single_customer(out, alpha, lambda, effort);
  out.diagnostics.push_back(
      {"share_equation_residual", alpha - (7.5 - 3.0 * lambda + 4.3 * m_e) / 14.0});
  out.diagnostics.push_back(
      {"bonus_equation_residual", lambda - (5.0 * gamma - 3.0 * (alpha + m_e))});
  out.diagnostics.push_back({"total_reduction_residual", effort + m_e - gamma});
  return out;
}

SolvedContract solve_mn_extension(double gamma, double m_n) {
  if (!(gamma > 0.0)) throw std::invalid_argument("solve_mn_extension: gamma must be > 0");
  // alpha = (7.5 - 3 lambda - 12.5 m_n) / 14,  lambda = 5 gamma - 3 alpha
  double alpha = 0.0, lambda = 0.0;
  solve_single_customer_pair(7.5 - 12.5 * m_n, 5.0 * gamma, alpha, lambda);
  const double effort = (3.0 * alpha + lambda) / 5.0;

  SolvedContract out;
  finish_single_customer(out, alpha, lambda, effort);
  out.diagnostics.push_back(
      {"share_equation_residual", alpha - (7.5 - 3.0 * lambda - 12.5 * m_n) / 14.0});
  out.diagnostics.push_back({"bonus_equation_residual", lambda - (5.0 * gamma - 3.0 * alpha)});
  out.diagnostics.push_back({"total_reduction_residual", effort - gamma});
  return out;
}

}  // namespace phantomdr
