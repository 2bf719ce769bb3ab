#include "phantomdr/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/core.h>

#include "phantomdr/customer.hpp"

namespace phantomdr::mc {

namespace {

constexpr std::int64_t kBlockUnits = 1024;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-style stream: cheap to key per (replication, customer), which a
// Mersenne Twister is not. Satisfies UniformRandomBitGenerator.
class SplitMixStream {
 public:
  using result_type = std::uint64_t;
  explicit SplitMixStream(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_ - 0x9e3779b97f4a7c15ULL);
  }

 private:
  std::uint64_t state_;
};

// Per-quantity layout of one replication's outputs.
struct Layout {
  std::size_t n;
  std::size_t size() const { return 3 * n + 2; }
  std::size_t utility(std::size_t i) const { return i; }
  std::size_t dra() const { return n; }
  std::size_t falsification(std::size_t i) const { return n + 1 + i; }
  std::size_t total() const { return 2 * n + 1; }
  std::size_t payment(std::size_t i) const { return 2 * n + 2 + i; }
};

struct Sums {
  std::vector<double> s1;  // sum of (v - shift)
  std::vector<double> s2;  // sum of (v - shift)^2
};

class Replicator {
 public:
  Replicator(const Scenario& s, const Contract& k, const StrategyProfile& p, const SimConfig& cfg)
      : s_(s), k_(k), p_(p), cfg_(cfg), layout_{s.size()}, x_(s.size()), r_(s.size()) {}

  // Writes replication `rep`'s quantities into `out`.
  void run(std::int64_t rep, std::vector<double>& out) {
    const std::size_t n = s_.size();
    const std::uint64_t stream = cfg_.antithetic ? rep / 2 : rep;
    const double sign = (cfg_.antithetic && rep % 2 == 1) ? -1.0 : 1.0;
    std::vector<double>& y = estimated_;
    y.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      SplitMixStream eng(stream_seed(cfg_.master_seed, stream, i));
      const NoiseModel& noise = s_.customers[i].noise;
      double dev = 0.0;
      if (noise.family == NoiseFamily::gaussian) {
        dev = std::normal_distribution<double>(0.0, 1.0)(eng) * noise.std;
      } else {
        const double h = noise.uniform_half_width();
        dev = std::uniform_real_distribution<double>(-h, h)(eng);
      }
      x_[i] = p_.efforts[i] + noise.mean + sign * dev;
      r_[i] = p_.reports[i](x_[i]);
      y[i] = x_[i];
      if (s_.m_n != 0.0) {
        const double est_std = cfg_.estimation_std.value_or(noise.std);
        const double est = std::normal_distribution<double>(0.0, 1.0)(eng) * est_std;
        y[i] += s_.m_n + sign * est;
      }
    }
    double total_x = 0.0, total_y = 0.0, paid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double bonus = bonus_payment(k_.bonus, i, r_);
      const double payment = k_.shares[i] * y[i] + bonus;
      out[layout_.utility(i)] = payment - effort_cost(p_.efforts[i]) -
                                falsification_cost(s_.customers[i].beta, r_[i] - x_[i]);
      out[layout_.falsification(i)] = r_[i] - x_[i];
      out[layout_.payment(i)] = payment;
      total_x += x_[i];
      total_y += y[i];
      paid += payment;
    }
    out[layout_.dra()] = total_y - paid;
    out[layout_.total()] = total_x;
  }

 private:
  const Scenario& s_;
  const Contract& k_;
  const StrategyProfile& p_;
  const SimConfig& cfg_;
  Layout layout_;
  std::vector<double> x_, r_, estimated_;
};

Sums reduce(const std::vector<Sums>& blocks, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return blocks[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Sums a = reduce(blocks, lo, mid);
  const Sums b = reduce(blocks, mid, hi);
  for (std::size_t q = 0; q < a.s1.size(); ++q) {
    a.s1[q] += b.s1[q];
    a.s2[q] += b.s2[q];
  }
  return a;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t rep, std::uint64_t customer) {
  return splitmix64(master ^ splitmix64(rep ^ splitmix64(customer ^ 0x6a09e667f3bcc908ULL)));
}

SimStats simulate(const Scenario& s, const Contract& k, const StrategyProfile& p,
                  const SimConfig& cfg) {
  if (cfg.n_reps < 1) throw std::invalid_argument("simulate: n_reps must be >= 1");
  if (cfg.antithetic && cfg.n_reps % 2 != 0)
    throw std::invalid_argument("simulate: antithetic sampling needs an even n_reps");
  check_shapes(s, k, p);
  if (const auto v = validate_scenario(s, k); !v.empty())
    throw std::invalid_argument("simulate: invalid scenario: " + v.front());

  const Layout layout{s.size()};
  const std::int64_t per_unit = cfg.antithetic ? 2 : 1;
  const std::int64_t units = cfg.n_reps / per_unit;
  const std::int64_t n_blocks = (units + kBlockUnits - 1) / kBlockUnits;

  // Shift by the first unit's values so sums of squares stay well conditioned.
  std::vector<double> shift(layout.size(), 0.0);
  {
    Replicator rep(s, k, p, cfg);
    std::vector<double> v(layout.size());
    for (std::int64_t r = 0; r < per_unit; ++r) {
      rep.run(r, v);
      for (std::size_t q = 0; q < v.size(); ++q) shift[q] += v[q] / per_unit;
    }
  }

  std::vector<Sums> blocks(n_blocks);
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    Replicator rep(s, k, p, cfg);
    std::vector<double> v(layout.size()), unit(layout.size());
    for (std::int64_t b = next++; b < n_blocks; b = next++) {
      Sums sums{std::vector<double>(layout.size(), 0.0), std::vector<double>(layout.size(), 0.0)};
      const std::int64_t end = std::min(units, (b + 1) * kBlockUnits);
      for (std::int64_t u = b * kBlockUnits; u < end; ++u) {
        std::fill(unit.begin(), unit.end(), 0.0);
        for (std::int64_t r = 0; r < per_unit; ++r) {
          rep.run(u * per_unit + r, v);
          for (std::size_t q = 0; q < v.size(); ++q) unit[q] += v[q];
        }
        for (std::size_t q = 0; q < v.size(); ++q) {
          const double d = unit[q] / per_unit - shift[q];
          sums.s1[q] += d;
          sums.s2[q] += d * d;
        }
      }
      blocks[b] = std::move(sums);
    }
  };

  unsigned n_workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  n_workers = static_cast<unsigned>(std::min<std::int64_t>(n_workers, n_blocks));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  const Sums total = reduce(blocks, 0, blocks.size());
  const double nu = static_cast<double>(units);
  auto estimate = [&](std::size_t q) {
    Estimate e;
    e.count = cfg.n_reps;
    e.mean = shift[q] + total.s1[q] / nu;
    if (units > 1) {
      const double var = (total.s2[q] - total.s1[q] * total.s1[q] / nu) / (nu - 1.0);
      e.se = std::sqrt(std::max(var, 0.0) / nu);
    }
    return e;
  };

  SimStats st;
  for (std::size_t i = 0; i < s.size(); ++i) {
    st.customer_utility.push_back(estimate(layout.utility(i)));
    st.falsification.push_back(estimate(layout.falsification(i)));
    st.payment.push_back(estimate(layout.payment(i)));
  }
  st.dra_utility = estimate(layout.dra());
  st.total_reduction = estimate(layout.total());
  return st;
}

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::fig2_beta_N: return "fig2_beta_N";
    case SweepKind::fig3_gamma_N: return "fig3_gamma_N";
    case SweepKind::fig4a_me: return "fig4a_me";
    case SweepKind::fig4b_mn: return "fig4b_mn";
  }
  return "unknown";
}

SweepKind parse_sweep_kind(const std::string& text) {
  if (text == "fig2" || text == "fig2_beta_N") return SweepKind::fig2_beta_N;
  if (text == "fig3" || text == "fig3_gamma_N") return SweepKind::fig3_gamma_N;
  if (text == "fig4a" || text == "fig4a_me") return SweepKind::fig4a_me;
  if (text == "fig4b" || text == "fig4b_mn") return SweepKind::fig4b_mn;
  throw std::invalid_argument("unknown sweep kind '" + text + "'");
}

SweepRow evaluate_point(SweepKind kind, int n, double beta, double gamma, double error_mean,
                        const GridSpec& grid, const SimConfig& cfg) {
  SweepRow row;
  row.kind = kind;
  row.n = n;
  row.beta = beta;
  row.sigma = grid.noise.std;
  NoiseModel noise = grid.noise;
  Scenario s;
  switch (kind) {
    case SweepKind::fig2_beta_N:
      row.param_name = "beta";
      row.param_value = beta;
      row.m_e = noise.mean;
      row.solved = solve_unspecified(n, beta, grid.r0);
      s = make_symmetric_scenario(n, beta, noise);
      break;
    case SweepKind::fig3_gamma_N:
      row.param_name = "gamma";
      row.param_value = gamma;
      row.gamma = gamma;
      noise.mean = 0.0;
      row.solved = solve_specified(n, beta, gamma);
      s = specified_scenario(n, beta, gamma, noise);
      break;
    case SweepKind::fig4a_me:
      row.param_name = "m_e";
      row.param_value = error_mean;
      row.gamma = gamma;
      row.m_e = error_mean;
      noise.mean = error_mean;
      row.solved = solve_me_extension(gamma, error_mean);
      s = specified_scenario(1, 1.0, gamma, noise);
      break;
    case SweepKind::fig4b_mn:
      row.param_name = "m_n";
      row.param_value = error_mean;
      row.gamma = gamma;
      row.m_n = error_mean;
      noise.mean = 0.0;
      row.solved = solve_mn_extension(gamma, error_mean);
      s = specified_scenario(1, 1.0, gamma, noise, error_mean);
      break;
  }
  if (kind == SweepKind::fig4a_me || kind == SweepKind::fig4b_mn) {
    row.n = 1;
    row.beta = 1.0;
  }
  const StrategyProfile p = row.solved.profile();
  row.closed = expected_outcome(s, row.solved.contract, p);
  row.e_pi_closed_sigma0 = dra_expected_utility(without_noise(s), row.solved.contract, p);
  if (row.solved.feasible) row.stats = simulate(s, row.solved.contract, p, cfg);
  return row;
}

std::vector<SweepRow> sweep(SweepKind kind, const GridSpec& grid, const SimConfig& cfg) {
  std::vector<SweepRow> rows;
  switch (kind) {
    case SweepKind::fig2_beta_N:
      for (double beta : grid.betas)
        for (int n : grid.ns) rows.push_back(evaluate_point(kind, n, beta, 0.0, 0.0, grid, cfg));
      break;
    case SweepKind::fig3_gamma_N: {
      const double beta = grid.betas.empty() ? 1.0 : grid.betas.front();
      for (double gamma : grid.gammas)
        for (int n : grid.ns) rows.push_back(evaluate_point(kind, n, beta, gamma, 0.0, grid, cfg));
      break;
    }
    case SweepKind::fig4a_me:
    case SweepKind::fig4b_mn:
      for (double gamma : grid.gammas)
        for (double m : grid.error_means)
          rows.push_back(evaluate_point(kind, 1, 1.0, gamma, m, grid, cfg));
      break;
  }
  return rows;
}

}  // namespace phantomdr::mc
