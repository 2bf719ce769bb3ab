#include "phantomdr/customer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

#include "phantomdr/detail/overloaded.hpp"
#include "phantomdr/nash.hpp"

namespace phantomdr {

using detail::overloaded;

namespace {

void require_positive_beta(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument(fmt::format("beta must be > 0, got {}", beta));
}

bool all_equal(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double bonus_marginal(const BonusRule& bonus, double report, double others_sum) {
  return std::visit(overloaded{
                        [](const ConstantBonus&) { return 0.0; },
                        [](const LinearBonus& b) { return b.mu; },
                        [&](const CournotBonus& b) {
                          return b.lambda - 2.0 * report - others_sum;
                        },
                    },
                    bonus);
}

AffineReport optimal_report_rule(const BonusRule& bonus, double beta, double others_sum) {
  require_positive_beta(beta);
  return std::visit(overloaded{
                        [](const ConstantBonus&) { return AffineReport::truthful(); },
                        [&](const LinearBonus& b) { return AffineReport{b.mu / beta, 1.0}; },
                        [&](const CournotBonus& b) {
                          return AffineReport{(b.lambda - others_sum) / (beta + 2.0),
                                              beta / (beta + 2.0)};
                        },
                    },
                    bonus);
}

double optimal_report(const BonusRule& bonus, double beta, double x, double others_sum) {
  return optimal_report_rule(bonus, beta, others_sum)(x);
}

double optimal_effort(const BonusRule& bonus, const CustomerParams& params, double alpha_i,
                      std::span<const double> others_efforts, int n) {
  require_positive_beta(params.beta);
  if (!(alpha_i >= 0.0)) throw std::invalid_argument("optimal_effort: alpha_i must be >= 0");
  return std::visit(
      overloaded{
          [&](const ConstantBonus&) { return alpha_i; },
          [&](const LinearBonus& b) { return b.mu + alpha_i; },
          [&](const CournotBonus& b) {
            if (others_efforts.size() + 1 != static_cast<std::size_t>(n)) {
              throw std::invalid_argument(fmt::format(
                  "optimal_effort: expected {} other efforts, got {}", n - 1, others_efforts.size()));
            }
            const NashConstants k = nash_constants(n, params.beta);
            const double m_e = params.noise.mean;
            double others_mean = 0.0;
            for (double a : others_efforts) others_mean += a + m_e;
            return (alpha_i + k.a_c * b.lambda - k.b_c * others_mean - (k.c_c - 1.0) * m_e) /
                   k.c_c;
          },
      },
      bonus);
}

std::vector<double> cournot_equilibrium_efforts(double lambda, double beta,
                                                std::span<const double> shares, double m_e) {
  const int n = static_cast<int>(shares.size());
  const NashConstants k = nash_constants(n, beta);
  // C a_i + B sum_{j!=i} a_j = rhs_i; summing gives sum_j a_j directly.
  std::vector<double> rhs(shares.size());
  double rhs_total = 0.0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    rhs[i] = shares[i] + k.a_c * lambda - k.b_c * (n - 1) * m_e - (k.c_c - 1.0) * m_e;
    rhs_total += rhs[i];
  }
  const double total = rhs_total / k.effort_denominator();
  const double diag = k.c_c - k.b_c;
  if (std::abs(diag) < 1e-14) throw std::domain_error("cournot_equilibrium_efforts: C == B");
  std::vector<double> efforts(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i) efforts[i] = (rhs[i] - k.b_c * total) / diag;
  return efforts;
}

StrategyProfile symmetric_best_response_profile(const Scenario& s, const Contract& k) {
  const std::size_t n = s.size();
  if (k.shares.size() != n) throw std::invalid_argument("shares list length != n_customers");
  StrategyProfile p;
  p.efforts.resize(n);
  p.reports.resize(n);

  std::visit(
      overloaded{
          [&](const ConstantBonus&) {
            for (std::size_t i = 0; i < n; ++i) {
              p.efforts[i] = k.shares[i];
              p.reports[i] = AffineReport::truthful();
            }
          },
          [&](const LinearBonus& b) {
            for (std::size_t i = 0; i < n; ++i) {
              require_positive_beta(s.customers[i].beta);
              p.efforts[i] = b.mu + k.shares[i];
              p.reports[i] = optimal_report_rule(b, s.customers[i].beta, 0.0);
            }
          },
          [&](const CournotBonus& b) {
            std::vector<double> betas, means;
            for (const auto& c : s.customers) {
              betas.push_back(c.beta);
              means.push_back(c.noise.mean);
            }
            if (n == 0) return;
            if (!all_equal(betas))
              throw std::invalid_argument("shared bonus requires a common beta");
            if (!all_equal(means))
              throw std::invalid_argument("shared bonus requires a common noise mean");
            const double beta = betas.front();
            const double m_e = means.front();
            p.efforts = cournot_equilibrium_efforts(b.lambda, beta, k.shares, m_e);
            const NashConstants nc = nash_constants(static_cast<int>(n), beta);
            double mean_total = 0.0;
            for (double a : p.efforts) mean_total += a + m_e;
            for (std::size_t i = 0; i < n; ++i) {
              const double own = p.efforts[i] + m_e;
              const double others = nc.others_expected_reports(b.lambda, own, mean_total - own);
              p.reports[i] = optimal_report_rule(b, beta, others);
            }
          },
      },
      k.bonus);
  return p;
}

std::vector<double> expected_falsification(const StrategyProfile& p, const Scenario& s) {
  if (p.efforts.size() != s.size() || p.reports.size() != s.size())
    throw std::invalid_argument("expected_falsification: length mismatch");
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double mean_x = p.efforts[i] + s.customers[i].noise.mean;
    out[i] = p.reports[i].intercept + (p.reports[i].slope - 1.0) * mean_x;
  }
  return out;
}

}  // namespace phantomdr
