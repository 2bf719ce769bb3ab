#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phantomdr/dra.hpp"
#include "phantomdr/model.hpp"

namespace phantomdr::mc {

struct SimConfig {
  std::int64_t n_reps = 100000;
  std::uint64_t master_seed = 0;
  bool antithetic = false;
  unsigned workers = 0;  // 0: hardware concurrency
  /// Std of the aggregator's estimation error; defaults to each customer's noise std.
  std::optional<double> estimation_std;
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::int64_t count = 0;
};

struct SimStats {
  std::vector<Estimate> customer_utility;  // V_i
  Estimate dra_utility;                    // Pi
  std::vector<Estimate> falsification;     // R_i - x_i
  Estimate total_reduction;                // sum_i x_i
  std::vector<Estimate> payment;           // P_i
};

/// Samples DR events under a fixed contract and strategy profile. Draws for
/// replication r and customer i come from a stream keyed by (master_seed, r, i)
/// and the reduction is a fixed tree over fixed-size blocks, so the result is
/// bit-identical for any worker count. With antithetic draws the standard
/// errors are computed over replication pairs, so n_reps must be even.
/// Throws std::invalid_argument on n_reps < 1, shape mismatches, or any
/// validate_scenario violation.
SimStats simulate(const Scenario& s, const Contract& k, const StrategyProfile& p,
                  const SimConfig& cfg);

/// Seed for the (replication, customer) stream; exposed for tests.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t rep, std::uint64_t customer);

enum class SweepKind { fig2_beta_N, fig3_gamma_N, fig4a_me, fig4b_mn };

std::string to_string(SweepKind kind);
/// Accepts "fig2", "fig3", "fig4a", "fig4b" and the full enumerator names.
SweepKind parse_sweep_kind(const std::string& text);

struct GridSpec {
  std::vector<double> betas{1.0};
  std::vector<int> ns{1};
  std::vector<double> gammas{0.4};
  std::vector<double> error_means{0.0};  // m_e (fig4a) or m_n (fig4b)
  double r0 = 1.0;
  NoiseModel noise;  // mean is overridden by fig4a
};

struct SweepRow {
  SweepKind kind = SweepKind::fig2_beta_N;
  std::string param_name;
  double param_value = 0.0;
  int n = 1;
  double beta = 1.0;
  double gamma = 0.0;  // 0 when the scenario has no target
  double m_e = 0.0;
  double m_n = 0.0;
  double sigma = 0.0;
  SolvedContract solved;
  ExpectedOutcome closed;
  double e_pi_closed_sigma0 = 0.0;
  std::optional<SimStats> stats;  // absent for infeasible points
};

/// Solves and (when feasible) simulates every grid point. fig4 kinds fix
/// N = 1 and beta = 1; fig2 uses the linear-bonus optimum with r0 from the grid.
std::vector<SweepRow> sweep(SweepKind kind, const GridSpec& grid, const SimConfig& cfg);

/// Solve, build the scenario and closed forms, and simulate one point.
SweepRow evaluate_point(SweepKind kind, int n, double beta, double gamma, double error_mean,
                        const GridSpec& grid, const SimConfig& cfg);

}  // namespace phantomdr::mc
