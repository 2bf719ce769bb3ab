#include "phantomdr/model.hpp"

#include "phantomdr/detail/overloaded.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

namespace phantomdr {

namespace {

using detail::overloaded;

struct Moments {
  std::vector<double> mean_x;  // E[x_i]
  std::vector<double> var_x;   // Var[x_i]
  std::vector<double> mean_r;  // E[R_i]
};

Moments moments(const Scenario& s, const StrategyProfile& p) {
  Moments m;
  const std::size_t n = s.size();
  m.mean_x.resize(n);
  m.var_x.resize(n);
  m.mean_r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.mean_x[i] = p.efforts[i] + s.customers[i].noise.mean;
    m.var_x[i] = s.customers[i].noise.variance();
    m.mean_r[i] = p.reports[i](m.mean_x[i]);
  }
  return m;
}

double expected_bonus(const Contract& k, const StrategyProfile& p, const Moments& m,
                      std::size_t i) {
  return std::visit(
      overloaded{
          [](const ConstantBonus& b) { return b.c; },
          [&](const LinearBonus& b) { return b.mu * (m.mean_r[i] - b.r0); },
          [&](const CournotBonus& b) {
            // E[R_i sum_j R_j] = E[R_i] sum_j E[R_j] + Var[R_i] by independence.
            const double total = std::accumulate(m.mean_r.begin(), m.mean_r.end(), 0.0);
            const double slope = p.reports[i].slope;
            return b.lambda * m.mean_r[i] - m.mean_r[i] * total -
                   slope * slope * m.var_x[i];
          },
      },
      k.bonus);
}

double expected_sq_falsification(const StrategyProfile& p, const Moments& m,
                                 std::size_t i) {
  const double bias = m.mean_r[i] - m.mean_x[i];
  const double drift = p.reports[i].slope - 1.0;
  return bias * bias + drift * drift * m.var_x[i];
}

}  // namespace

double NoiseModel::uniform_half_width() const { return std * std::sqrt(3.0); }

Scenario make_symmetric_scenario(int n, double beta, NoiseModel noise,
                                 std::optional<double> gamma, double m_n) {
  Scenario s;
  s.n_customers = n;
  s.customers.assign(n > 0 ? static_cast<std::size_t>(n) : 0, CustomerParams{beta, noise});
  s.gamma = gamma;
  s.m_n = m_n;
  return s;
}

std::string bonus_name(const BonusRule& bonus) {
  return std::visit(overloaded{
                        [](const ConstantBonus&) { return std::string("constant"); },
                        [](const LinearBonus&) { return std::string("linear"); },
                        [](const CournotBonus&) { return std::string("cournot"); },
                    },
                    bonus);
}

double bonus_payment(const BonusRule& bonus, std::size_t i,
                     const std::vector<double>& reports) {
  return std::visit(
      overloaded{
          [](const ConstantBonus& b) { return b.c; },
          [&](const LinearBonus& b) { return b.mu * (reports[i] - b.r0); },
          [&](const CournotBonus& b) {
            const double total = std::accumulate(reports.begin(), reports.end(), 0.0);
            return reports[i] * (b.lambda - total);
          },
      },
      bonus);
}

std::vector<std::string> validate_scenario(const Scenario& s, const Contract& k) {
  std::vector<std::string> out;
  if (s.n_customers < 1) out.emplace_back("n_customers < 1");
  if (s.customers.size() != static_cast<std::size_t>(std::max(s.n_customers, 0)))
    out.emplace_back("customers list length != n_customers");
  for (std::size_t i = 0; i < s.customers.size(); ++i) {
    const auto& c = s.customers[i];
    if (!(c.beta > 0.0)) out.push_back(fmt::format("beta <= 0 (customer {})", i));
    if (!(c.noise.std >= 0.0)) out.push_back(fmt::format("noise std < 0 (customer {})", i));
  }
  if (s.gamma && !(*s.gamma > 0.0)) out.emplace_back("gamma <= 0");

  if (k.shares.size() != s.customers.size())
    out.emplace_back("shares list length != n_customers");
  double total = 0.0;
  for (std::size_t i = 0; i < k.shares.size(); ++i) {
    if (!(k.shares[i] >= 0.0)) out.push_back(fmt::format("share < 0 (customer {})", i));
    total += k.shares[i];
  }
  if (!(total < 1.0)) out.emplace_back("sum of shares ≥ 1");

  std::visit(overloaded{
                 [&](const ConstantBonus& b) {
                   if (!(b.c >= 0.0)) out.emplace_back("c < 0");
                 },
                 [&](const LinearBonus& b) {
                   if (!(b.mu >= 0.0)) out.emplace_back("mu < 0");
                   if (!(b.r0 >= 0.0)) out.emplace_back("r0 < 0");
                 },
                 [&](const CournotBonus& b) {
                   if (!std::isfinite(b.lambda)) out.emplace_back("lambda not finite");
                 },
             },
             k.bonus);
  return out;
}

void check_shapes(const Scenario& s, const Contract& k, const StrategyProfile& p) {
  const std::size_t n = s.size();
  if (k.shares.size() != n || p.efforts.size() != n || p.reports.size() != n) {
    throw std::invalid_argument(fmt::format(
        "length mismatch: {} customers, {} shares, {} efforts, {} report rules", n,
        k.shares.size(), p.efforts.size(), p.reports.size()));
  }
}

double customer_expected_utility(const Scenario& s, const Contract& k,
                                 const StrategyProfile& p, std::size_t i) {
  check_shapes(s, k, p);
  if (i >= s.size()) throw std::out_of_range("customer index out of range");
  const Moments m = moments(s, p);
  return k.shares[i] * (m.mean_x[i] + s.m_n) + expected_bonus(k, p, m, i) -
         effort_cost(p.efforts[i]) -
         0.5 * s.customers[i].beta * expected_sq_falsification(p, m, i);
}

double dra_expected_utility(const Scenario& s, const Contract& k,
                            const StrategyProfile& p) {
  return expected_outcome(s, k, p).dra_utility;
}

ExpectedOutcome expected_outcome(const Scenario& s, const Contract& k,
                                 const StrategyProfile& p) {
  check_shapes(s, k, p);
  const Moments m = moments(s, p);
  const std::size_t n = s.size();
  ExpectedOutcome out;
  out.customer_utilities.resize(n);
  out.expected_falsification.resize(n);
  out.expected_payments.resize(n);
  double paid = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double estimated = m.mean_x[i] + s.m_n;
    const double bonus = expected_bonus(k, p, m, i);
    out.expected_payments[i] = k.shares[i] * estimated + bonus;
    out.customer_utilities[i] =
        out.expected_payments[i] - effort_cost(p.efforts[i]) -
        0.5 * s.customers[i].beta * expected_sq_falsification(p, m, i);
    out.expected_falsification[i] = m.mean_r[i] - m.mean_x[i];
    out.expected_total_reduction += m.mean_x[i];
    out.expected_estimated_reduction += estimated;
    paid += out.expected_payments[i];
  }
  out.dra_utility = out.expected_estimated_reduction - paid;
  return out;
}

Scenario without_noise(Scenario s) {
  for (auto& c : s.customers) c.noise.std = 0.0;
  return s;
}

}  // namespace phantomdr
