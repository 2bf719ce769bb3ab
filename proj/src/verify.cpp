#include "phantomdr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/core.h>

#include "phantomdr/customer.hpp"
#include "phantomdr/detail/overloaded.hpp"

namespace phantomdr::verify {

using detail::overloaded;

namespace {

constexpr double kInvPhi = 0.6180339887498948482;

std::string num(double v) { return fmt::format("{:.12g}", v); }

double checked(double v) {
  if (!std::isfinite(v)) throw std::domain_error("scalar_maximize: objective is not finite");
  return v;
}

// Gaussian elimination with partial pivoting; `a` is row-major n x n.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-14) throw std::domain_error("solve_dense: singular system");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

// Oracle-fitted report behaviour R(x, S) = base + slope x - others_weight S.
// The report objective is quadratic, so three exact maximizations pin it.
struct FittedRule {
  double base = 0.0;
  double slope = 1.0;
  double others_weight = 0.0;
};

FittedRule fit_rule(const BonusRule& bonus, double beta) {
  const double r00 = oracle_best_report(bonus, beta, 0.0, 0.0).argmax;
  const double r10 = oracle_best_report(bonus, beta, 1.0, 0.0).argmax;
  const double r01 = oracle_best_report(bonus, beta, 0.0, 1.0).argmax;
  return {r00, r10 - r00, r00 - r01};
}

std::vector<FittedRule> fit_rules(const Scenario& s, const Contract& k) {
  std::vector<FittedRule> rules;
  rules.reserve(s.size());
  for (const auto& c : s.customers) rules.push_back(fit_rule(k.bonus, c.beta));
  return rules;
}

std::vector<AffineReport> equilibrium_from_rules(const Scenario& s,
                                                 const std::vector<FittedRule>& rules,
                                                 const std::vector<double>& efforts) {
  // r_j = base_j + slope_j E[x_j] - w_j (sum_k r_k - r_j)
  const std::size_t n = s.size();
  std::vector<double> a(n * n), b(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < n; ++c) a[j * n + c] = rules[j].others_weight;
    a[j * n + j] = 1.0;
    b[j] = rules[j].base + rules[j].slope * (efforts[j] + s.customers[j].noise.mean);
  }
  const std::vector<double> r = solve_dense(std::move(a), std::move(b));
  double total = 0.0;
  for (double v : r) total += v;
  std::vector<AffineReport> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = {rules[j].base - rules[j].others_weight * (total - r[j]), rules[j].slope};
  }
  return out;
}

double others_expected_sum(const Scenario& s, const StrategyProfile& p, std::size_t i) {
  double sum = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j)
    if (j != i) sum += p.reports[j](p.efforts[j] + s.customers[j].noise.mean);
  return sum;
}

const std::vector<double> kSampleX{-1.0, 0.0, 0.5, 1.0, 2.0, 3.0};

}  // namespace

std::string CheckReport::get(const std::string& key) const {
  for (const auto& [k, v] : context)
    if (k == key) return v;
  return {};
}

CheckReport make_report(std::string name, double residual, double tolerance) {
  CheckReport r;
  r.name = std::move(name);
  r.residual = residual;
  r.tolerance = tolerance;
  r.passed = std::abs(residual) <= tolerance;
  return r;
}

Maximum scalar_maximize(const std::function<double(double)>& f, double lo, double hi, double tol,
                        int grid_points) {
  if (!(lo < hi)) throw std::invalid_argument("scalar_maximize: need lo < hi");
  grid_points = std::max(grid_points, 3);
  const double step = (hi - lo) / (grid_points - 1);
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int g = 0; g < grid_points; ++g) {
    const double v = checked(f(lo + g * step));
    if (v > best_val) {
      best_val = v;
      best = g;
    }
  }
  double a = lo + std::max(best - 1, 0) * step;
  double b = lo + std::min(best + 1, grid_points - 1) * step;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = checked(f(c)), fd = checked(f(d));
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = checked(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = checked(f(d));
    }
  }
  Maximum m;
  m.argmax = 0.5 * (a + b);
  m.value = checked(f(m.argmax));
  // The grid point itself may beat the refined interior (plateaus, kinks).
  const double grid_arg = lo + best * step;
  if (best_val > m.value) {
    m.argmax = grid_arg;
    m.value = best_val;
  }
  const double edge = std::max(tol, 1e-12 * (hi - lo));
  m.at_bound = (m.argmax - lo) <= 2.0 * edge || (hi - m.argmax) <= 2.0 * edge;
  return m;
}

Maximum oracle_best_report(const BonusRule& bonus, double beta, double x, double others_sum,
                           Bounds bounds) {
  auto objective = [&](double r) {
    const std::vector<double> reports{r, others_sum};
    return bonus_payment(bonus, 0, reports) - falsification_cost(beta, r - x);
  };
  return scalar_maximize(objective, bounds.lo, bounds.hi);
}

std::vector<AffineReport> oracle_reporting_equilibrium(const Scenario& s, const Contract& k,
                                                       const std::vector<double>& efforts) {
  return equilibrium_from_rules(s, fit_rules(s, k), efforts);
}

Maximum oracle_best_effort(const Scenario& s, const Contract& k, std::size_t i,
                           const std::vector<double>& others_efforts, Bounds bounds) {
  if (i >= s.size() || others_efforts.size() + 1 != s.size())
    throw std::invalid_argument("oracle_best_effort: bad customer index or effort count");
  const std::vector<FittedRule> rules = fit_rules(s, k);
  std::vector<double> efforts(s.size());
  for (std::size_t j = 0, o = 0; j < s.size(); ++j)
    if (j != i) efforts[j] = others_efforts[o++];
  auto objective = [&](double a) {
    StrategyProfile p;
    p.efforts = efforts;
    p.efforts[i] = a;
    p.reports = equilibrium_from_rules(s, rules, p.efforts);
    return customer_expected_utility(s, k, p, i);
  };
  return scalar_maximize(objective, bounds.lo, bounds.hi);
}

CheckReport check_ic_linear(double mu, double beta, const AffineReport& rule) {
  double foc = 0.0;
  if (rule.slope != 0.0) {
    for (double x : kSampleX) foc = std::max(foc, std::abs(mu - beta * (rule(x) - x)));
  }
  const double slope_violation = rule.slope < 0.0 ? -rule.slope : 0.0;
  CheckReport r = make_report("ic_linear", std::max(foc, slope_violation), 1e-10);
  r.context = {{"foc_residual", num(foc)}, {"slope", num(rule.slope)}};
  if (slope_violation > 0.0) r.passed = false;
  return r;
}

CheckReport check_ic_cournot(double lambda, double beta, int n, const StrategyProfile& p,
                             double m_e) {
  if (n < 1 || p.reports.size() != static_cast<std::size_t>(n) ||
      p.efforts.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("check_ic_cournot: profile size != n");
  std::vector<double> expected(n);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    expected[j] = p.reports[j](p.efforts[j] + m_e);
    total += expected[j];
  }
  double rule_residual = 0.0;
  double min_slope = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    min_slope = std::min(min_slope, p.reports[i].slope);
    const double others = total - expected[i];
    for (double dx : kSampleX) {
      const double x = p.efforts[i] + m_e + dx;
      rule_residual = std::max(rule_residual, std::abs(lambda + beta * x - (beta + 2.0) * p.reports[i](x) - others));
    }
  }
  const double slope_violation = min_slope < 0.0 ? -min_slope : 0.0;
  CheckReport r = make_report("ic_cournot", std::max(rule_residual, slope_violation), 1e-10);
  r.context = {{"report_rule_residual", num(rule_residual)}, {"min_slope", num(min_slope)}};
  if (slope_violation > 0.0) r.passed = false;
  return r;
}

CheckReport check_report_foc(const BonusRule& bonus, double beta, double x, double others_sum,
                             double tolerance) {
  const double r = optimal_report(bonus, beta, x, others_sum);
  return make_report("report_foc",
                     beta * (r - x) - bonus_marginal(bonus, r, others_sum), tolerance);
}

CheckReport check_nash(const Scenario& s, const Contract& k, const StrategyProfile& p,
                       double epsilon) {
  check_shapes(s, k, p);
  const std::vector<FittedRule> rules = fit_rules(s, k);
  double report_gain = 0.0, effort_gain = 0.0, fixed_rule_gain = 0.0;
  std::size_t worst = 0;
  double worst_gain = -std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < s.size(); ++i) {
    const double base = customer_expected_utility(s, k, p, i);

    StrategyProfile dev = p;
    auto by_intercept = [&](double c) {
      dev.reports[i].intercept = c;
      return customer_expected_utility(s, k, dev, i);
    };
    const double c0 = p.reports[i].intercept;
    const Maximum best_report = scalar_maximize(by_intercept, std::min(kReportBounds.lo, c0 - 1.0),
                                                std::max(kReportBounds.hi, c0 + 1.0));
    const double gr = best_report.value - base;

    auto by_effort = [&](double a) {
      StrategyProfile q = p;
      q.efforts[i] = a;
      q.reports = equilibrium_from_rules(s, rules, q.efforts);
      return customer_expected_utility(s, k, q, i);
    };
    const Maximum best_effort = scalar_maximize(by_effort, kEffortBounds.lo, kEffortBounds.hi);
    const double ge = best_effort.value - base;

    // Same deviation with every report rule frozen (a simultaneous-move reading).
    dev = p;
    auto frozen = [&](double a) {
      dev.efforts[i] = a;
      return customer_expected_utility(s, k, dev, i);
    };
    fixed_rule_gain = std::max(
        fixed_rule_gain, scalar_maximize(frozen, kEffortBounds.lo, kEffortBounds.hi).value - base);

    report_gain = std::max(report_gain, gr);
    effort_gain = std::max(effort_gain, ge);
    if (std::max(gr, ge) > worst_gain) {
      worst_gain = std::max(gr, ge);
      worst = i;
    }
  }
  const double gain = std::max({report_gain, effort_gain, 0.0});
  CheckReport r = make_report("nash", gain, epsilon);
  r.context = {{"max_report_gain", num(report_gain)},
               {"max_effort_gain", num(effort_gain)},
               {"frozen_rules_effort_gain", num(fixed_rule_gain)},
               {"worst_customer", std::to_string(worst)}};
  return r;
}

std::vector<CheckReport> check_individual_rationality(const Scenario& s, const Contract& k,
                                                      const StrategyProfile& p) {
  std::vector<CheckReport> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = customer_expected_utility(s, k, p, i);
    CheckReport r = make_report(fmt::format("ir_customer_{}", i), std::min(0.0, v), 0.0);
    r.context = {{"expected_utility", num(v)}};
    out.push_back(std::move(r));
  }
  return out;
}

CheckReport constrained_search_diagnostic(int n, double beta, double gamma) {
  const GammaBound bound = gamma_upper_bound(n, beta);
  if (bound.bounded && gamma > bound.value) throw std::domain_error("gamma exceeds bound");
  const NashConstants nc = nash_constants(n, beta);
  const Scenario s = without_noise(specified_scenario(n, beta, gamma));

  auto lambda_for = [&](double alpha) {
    return (nc.effort_denominator() * gamma - n * alpha) / (n * nc.a_c);
  };
  auto e_pi = [&](double alpha) {
    Contract k{std::vector<double>(n, alpha), CournotBonus{lambda_for(alpha)}};
    return dra_expected_utility(s, k, symmetric_best_response_profile(s, k));
  };

  const SolvedContract eq_solution = solve_specified(n, beta, gamma);
  const double eq_alpha = eq_solution.share();
  const double eq_value = e_pi(eq_alpha);
  const Maximum best = scalar_maximize(e_pi, 0.0, 1.0 / n - 1e-9);

  CheckReport r = make_report("constrained_search_gap", best.value - eq_value,
                              std::numeric_limits<double>::infinity());
  r.diagnostic = true;
  r.context = {{"equilibrium_alpha", num(eq_alpha)},
               {"equilibrium_lambda", num(eq_solution.bonus_parameter())},
               {"equilibrium_e_pi", num(eq_value)},
               {"search_alpha", num(best.argmax)},
               {"search_lambda", num(lambda_for(best.argmax))},
               {"search_e_pi", num(best.value)},
               {"search_at_bound", best.at_bound ? "true" : "false"}};
  return r;
}

CheckReport me_coefficient_diagnostic(double gamma, double m_e) {
  const SolvedContract ext = solve_me_extension(gamma, m_e);
  const double lambda = ext.bonus_parameter();
  NoiseModel noise;
  noise.mean = m_e;
  noise.std = 0.0;
  const Scenario s = specified_scenario(1, 1.0, gamma, noise);
  auto e_pi = [&](double alpha) {
    Contract k{{alpha}, CournotBonus{lambda}};
    return dra_expected_utility(s, k, symmetric_best_response_profile(s, k));
  };
  const double h = 1e-5;
  const double alpha = ext.share();
  const double slope = (e_pi(alpha + h) - e_pi(alpha - h)) / (2.0 * h);
  const double rederived = scalar_maximize(e_pi, -2.0, 2.0).argmax;

  CheckReport r = make_report("me_share_condition", slope, std::numeric_limits<double>::infinity());
  r.diagnostic = true;
  r.context = {{"alpha_extension", num(alpha)},
               {"alpha_rederived_at_same_lambda", num(rederived)},
               {"dE_pi_dalpha", num(slope)}};
  if (m_e != 0.0) {
    r.context.emplace_back("rederived_me_coefficient",
                           num((14.0 * rederived - 7.5 + 3.0 * lambda) / m_e));
  }
  return r;
}

std::vector<CheckReport> demo_degenerate_contracts() {
  std::vector<CheckReport> out;

  {  // Fixed payment: nothing rewards effort.
    const Scenario s = make_symmetric_scenario(1, 1.0);
    const Contract k{{0.0}, ConstantBonus{1.0}};
    const Maximum m = oracle_best_effort(s, k, 0, {});
    CheckReport r = make_report("constant_bonus_moral_hazard", m.argmax, 1e-6);
    r.context = {{"best_effort", num(m.argmax)}, {"share", "0"}, {"bonus", "constant c=1"}};
    out.push_back(std::move(r));
  }

  {  // Linear bonus with a cheap lie: the report runs away like c / beta.
    const double c = 1.0, x = 1.0;
    const LinearBonus bonus{c, 0.0};
    const Maximum clipped = oracle_best_report(bonus, 0.01, x, 0.0);
    const Maximum wide = oracle_best_report(bonus, 0.01, x, 0.0, {-10.0, 1000.0});
    const Maximum halved = oracle_best_report(bonus, 0.005, x, 0.0, {-10.0, 1000.0});
    const double expected = x + c / 0.01;
    CheckReport r = make_report("linear_bonus_report_inflation", wide.argmax / expected - 1.0, 1e-6);
    r.context = {{"beta", "0.01"},
                 {"report", num(wide.argmax)},
                 {"default_bounds_at_bound", clipped.at_bound ? "true" : "false"},
                 {"inflation", num(wide.argmax - x)},
                 {"inflation_half_beta", num(halved.argmax - x)}};
    if (!clipped.at_bound) r.passed = false;
    out.push_back(std::move(r));
  }

  {  // Truthful reporting forces a constant bonus; first-best effort then needs alpha = 1.
    const Scenario s = make_symmetric_scenario(1, 1.0);
    const double truthful = oracle_best_report(ConstantBonus{0.0}, 1.0, 0.7, 0.0).argmax;
    auto effort_at = [&](double alpha) {
      return oracle_best_effort(s, Contract{{alpha}, ConstantBonus{0.0}}, 0, {}).argmax;
    };
    double lo = 0.0, hi = 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (effort_at(mid) < 1.0 ? lo : hi) = mid;
    }
    const double required = 0.5 * (lo + hi);
    const auto violations = validate_scenario(s, Contract{{required}, ConstantBonus{0.0}});
    const bool share_cap_broken =
        std::find(violations.begin(), violations.end(), "sum of shares ≥ 1") != violations.end();
    CheckReport r = make_report("truthful_first_best_witness", std::max(0.0, 1.0 - required), 1e-6);
    r.context = {{"truthful_report_at_x_0.7", num(truthful)},
                 {"required_sum_alpha", num(required)},
                 {"violates_share_cap", share_cap_broken ? "true" : "false"}};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CheckReport> run_suite(const Scenario& s, const SolvedContract& solved,
                                   double epsilon) {
  const Contract& k = solved.contract;
  const StrategyProfile p = solved.profile();
  check_shapes(s, k, p);
  std::vector<CheckReport> out;

  double foc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double others = others_expected_sum(s, p, i);
    for (double x : kSampleX)
      foc = std::max(foc, std::abs(check_report_foc(k.bonus, s.customers[i].beta, x, others).residual));
  }
  out.push_back(make_report("report_foc", foc, 1e-10));

  std::visit(overloaded{
                 [](const ConstantBonus&) {},
                 [&](const LinearBonus& b) {
                   CheckReport worst = check_ic_linear(b.mu, s.customers[0].beta, p.reports[0]);
                   for (std::size_t i = 1; i < s.size(); ++i) {
                     CheckReport r = check_ic_linear(b.mu, s.customers[i].beta, p.reports[i]);
                     if (!r.passed || r.residual > worst.residual) worst = r;
                   }
                   out.push_back(worst);
                 },
                 [&](const CournotBonus& b) {
                   out.push_back(check_ic_cournot(b.lambda, s.customers[0].beta,
                                                  static_cast<int>(s.size()), p,
                                                  s.customers[0].noise.mean));
                 },
             },
             k.bonus);

  for (auto& r : check_individual_rationality(s, k, p)) out.push_back(std::move(r));

  double effort_gap = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<double> others;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (j != i) others.push_back(p.efforts[j]);
    effort_gap = std::max(effort_gap, std::abs(oracle_best_effort(s, k, i, others).argmax - p.efforts[i]));
  }
  out.push_back(make_report("effort_oracle", effort_gap, 1e-6));

  out.push_back(check_nash(s, k, p, epsilon));
  return out;
}

}  // namespace phantomdr::verify
