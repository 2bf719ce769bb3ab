#include "phantomdr/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "phantomdr/verify.hpp"

namespace phantomdr::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError(line > 0 ? fmt::format("config:{}: {}", line, msg) : "config: " + msg);
}

double to_real(const std::string& text, int line = 0) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(line, fmt::format("expected a number, got '{}'", t));
  return v;
}

template <class Int>
Int to_int(const std::string& text, int line = 0) {
  const std::string t = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(line, fmt::format("expected an integer, got '{}'", t));
  return v;
}

bool to_bool(const std::string& text, int line) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  fail(line, fmt::format("expected true or false, got '{}'", t));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt::format("{:.17g}", v[i]);
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string report_text(const AffineReport& r) {
  return fmt::format("{} + {} x", fmt_num(r.intercept), fmt_num(r.slope));
}

std::string bonus_label(const SolvedContract& s) {
  return std::holds_alternative<CournotBonus>(s.contract.bonus) ? "lambda" : "mu";
}

void print_solution(const Solution& sol, std::ostream& out) {
  const SolvedContract& s = sol.solved;
  out << fmt::format("alpha={} {}={} effort={}\n", fmt_num(s.share()), bonus_label(s),
                     fmt_num(s.bonus_parameter()), fmt_num(s.effort()));
  auto line = [&](const std::string& k, const std::string& v) {
    out << fmt::format("  {:<32} {}\n", k, v);
  };
  line("solver", sol.solver);
  line("n", std::to_string(sol.scenario.n_customers));
  line("beta", fmt_num(sol.scenario.customers.front().beta));
  line("gamma", sol.scenario.gamma ? fmt_num(*sol.scenario.gamma) : "none");
  line("bonus", bonus_name(s.contract.bonus));
  line("alpha*", fmt_num(s.share()));
  line(bonus_label(s) + "*", fmt_num(s.bonus_parameter()));
  line("effort", fmt_num(s.effort()));
  line("report", report_text(s.predicted_reports.front()));
  line("feasible", s.feasible ? "true" : "false");
  for (const auto& why : s.infeasibility) line("infeasible_because", why);
  for (const auto& d : s.diagnostics) line(d.name, fmt_num(d.value));
}

void print_checks(const std::vector<verify::CheckReport>& checks, std::ostream& out) {
  for (const auto& c : checks) {
    const char* status = c.diagnostic ? "INFO" : (c.passed ? "PASS" : "FAIL");
    std::string ctx;
    for (const auto& [k, v] : c.context) ctx += fmt::format(" {}={}", k, v);
    out << fmt::format("{:<4}  {:<30} residual={:<20} tol={:<8}{}\n", status, c.name,
                       fmt_num(c.residual), fmt_num(c.tolerance), ctx);
  }
}

bool write_output(const std::string& path, const std::string& content, std::ostream& out,
                  std::ostream& err) {
  if (path.empty()) {
    out << content;
    return true;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    err << "error: cannot write " << path << "\n";
    return false;
  }
  f << content;
  f.close();
  if (!f) {
    err << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

mc::GridSpec grid_from(const RunConfig& c) {
  mc::GridSpec g;
  g.r0 = c.r0;
  g.noise = NoiseModel{c.noise, c.m_e, c.sigma};
  return g;
}

mc::SimConfig sim_from(const RunConfig& c) {
  mc::SimConfig s;
  s.n_reps = c.reps;
  s.master_seed = c.seed;
  s.antithetic = c.antithetic;
  return s;
}

std::string solution_csv(const Solution& sol) {
  const SolvedContract& s = sol.solved;
  const AffineReport& r = s.predicted_reports.front();
  std::string out =
      "n,beta,gamma,m_e,m_n,alpha_star,lambda_or_mu,feasible,effort,report_intercept,report_slope\n";
  out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", sol.scenario.n_customers,
                     fmt_num(sol.scenario.customers.front().beta),
                     sol.scenario.gamma ? fmt_num(*sol.scenario.gamma) : "",
                     fmt_num(sol.scenario.customers.front().noise.mean), fmt_num(sol.scenario.m_n),
                     fmt_num(s.share()), fmt_num(s.bonus_parameter()), s.feasible ? "true" : "false",
                     fmt_num(s.effort()), fmt_num(r.intercept), fmt_num(r.slope));
  return out;
}

}  // namespace

std::string fmt_num(double v) { return fmt::format("{:.12g}", v); }

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ','))
    if (!item.empty()) out.push_back(to_real(item));
  if (out.empty()) throw ConfigError(fmt::format("empty list '{}'", text));
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const int lo = to_int<int>(item.substr(0, dots));
      const int hi = to_int<int>(item.substr(dots + 2));
      if (hi < lo) throw ConfigError(fmt::format("empty range '{}'", item));
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(to_int<int>(item));
    }
  }
  if (out.empty()) throw ConfigError(fmt::format("empty list '{}'", text));
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::string section;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "contract" && section != "sim" && section != "sweep")
        fail(line_no, fmt::format("unknown section [{}]", section));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail(line_no, fmt::format("key '{}' outside any section", key));
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) fail(line_no, fmt::format("duplicate key {}", full));

    try {
      if (full == "scenario.n") {
        c.n = to_int<int>(value, line_no);
        if (c.n < 1) fail(line_no, "n must be >= 1");
      } else if (full == "scenario.beta") {
        c.beta = to_real(value, line_no);
        if (!(c.beta > 0.0)) fail(line_no, "beta must be > 0");
      } else if (full == "scenario.gamma") {
        if (value == "none") {
          c.gamma.reset();
        } else {
          c.gamma = to_real(value, line_no);
          if (!(*c.gamma > 0.0)) fail(line_no, "gamma must be > 0");
        }
      } else if (full == "scenario.m_e") {
        c.m_e = to_real(value, line_no);
      } else if (full == "scenario.m_n") {
        c.m_n = to_real(value, line_no);
      } else if (full == "scenario.sigma") {
        c.sigma = to_real(value, line_no);
        if (!(c.sigma >= 0.0)) fail(line_no, "sigma must be >= 0");
      } else if (full == "scenario.noise") {
        if (value == "gaussian") c.noise = NoiseFamily::gaussian;
        else if (value == "uniform") c.noise = NoiseFamily::uniform;
        else fail(line_no, fmt::format("unknown noise family '{}'", value));
      } else if (full == "contract.r0") {
        c.r0 = to_real(value, line_no);
        if (!(c.r0 >= 0.0)) fail(line_no, "r0 must be >= 0");
      } else if (full == "sim.reps") {
        c.reps = to_int<std::int64_t>(value, line_no);
        if (c.reps < 1) fail(line_no, "reps must be >= 1");
      } else if (full == "sim.seed") {
        c.seed = to_int<std::uint64_t>(value, line_no);
      } else if (full == "sim.antithetic") {
        c.antithetic = to_bool(value, line_no);
      } else if (full == "sweep.kind") {
        mc::parse_sweep_kind(value);
        c.sweep_kind = value;
      } else if (full == "sweep.beta") {
        c.sweep_betas = parse_real_list(value);
      } else if (full == "sweep.n") {
        c.sweep_ns = parse_int_list(value);
      } else if (full == "sweep.gamma") {
        c.sweep_gammas = parse_real_list(value);
      } else if (full == "sweep.m") {
        c.sweep_error_means = parse_real_list(value);
      } else {
        fail(line_no, fmt::format("unknown key {}", full));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(line_no, e.what());
    }
  }
  for (const char* required : {"scenario.n", "scenario.beta"})
    if (!seen.count(required)) fail(0, fmt::format("missing required key {}", required));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("config: cannot read {}", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
  auto r = [](double v) { return fmt::format("{:.17g}", v); };
  std::string out = "# phantomdr configuration\n[scenario]\n";
  out += fmt::format("n = {}\nbeta = {}\ngamma = {}\nm_e = {}\nm_n = {}\nsigma = {}\nnoise = {}\n", c.n,
                     r(c.beta), c.gamma ? r(*c.gamma) : "none", r(c.m_e), r(c.m_n), r(c.sigma),
                     c.noise == NoiseFamily::gaussian ? "gaussian" : "uniform");
  out += fmt::format("\n[contract]\nr0 = {}\n", r(c.r0));
  out += fmt::format("\n[sim]\nreps = {}\nseed = {}\nantithetic = {}\n", c.reps, c.seed,
                     c.antithetic ? "true" : "false");
  out += fmt::format("\n[sweep]\nkind = {}\n", c.sweep_kind);
  if (!c.sweep_betas.empty()) out += "beta = " + join_reals(c.sweep_betas) + "\n";
  if (!c.sweep_ns.empty()) out += "n = " + join_ints(c.sweep_ns) + "\n";
  if (!c.sweep_gammas.empty()) out += "gamma = " + join_reals(c.sweep_gammas) + "\n";
  if (!c.sweep_error_means.empty()) out += "m = " + join_reals(c.sweep_error_means) + "\n";
  return out;
}

Solution solve_config(const RunConfig& c) {
  Solution sol;
  sol.scenario = make_symmetric_scenario(c.n, c.beta, NoiseModel{c.noise, c.m_e, c.sigma}, c.gamma,
                                         c.m_n);
  if (!c.gamma) {
    if (c.m_e != 0.0) throw ConfigError("config: m_e requires a gamma target");
    sol.kind = mc::SweepKind::fig2_beta_N;
    sol.solver = "unspecified (linear bonus)";
    sol.solved = solve_unspecified(c.n, c.beta, c.r0);
    return sol;
  }
  if (c.m_e != 0.0 && c.m_n != 0.0) throw ConfigError("config: m_e and m_n cannot both be nonzero");
  if ((c.m_e != 0.0 || c.m_n != 0.0) && (c.n != 1 || c.beta != 1.0))
    throw ConfigError("config: error-mean extensions need n = 1 and beta = 1");
  if (c.m_e != 0.0) {
    sol.kind = mc::SweepKind::fig4a_me;
    sol.solver = "realization-error extension";
    sol.solved = solve_me_extension(*c.gamma, c.m_e);
  } else if (c.m_n != 0.0) {
    sol.kind = mc::SweepKind::fig4b_mn;
    sol.solver = "estimation-error extension";
    sol.solved = solve_mn_extension(*c.gamma, c.m_n);
  } else {
    sol.kind = mc::SweepKind::fig3_gamma_N;
    sol.solver = "specified (shared bonus)";
    sol.solved = solve_specified(c.n, c.beta, *c.gamma);
  }
  return sol;
}

std::string csv_header() {
  return "kind,param_name,param_value,n,beta,gamma,m_e,m_n,sigma,alpha_star,lambda_or_mu,feasible,"
         "effort,e_pi_closed,e_pi_mc,e_pi_se,e_fals,e_payment,e_v,e_pi_closed_sigma0\n";
}

std::string csv_row(const mc::SweepRow& row) {
  const bool has_gamma = row.kind != mc::SweepKind::fig2_beta_N;
  std::string mc_mean, mc_se;
  if (row.stats) {
    mc_mean = fmt_num(row.stats->dra_utility.mean);
    mc_se = fmt_num(row.stats->dra_utility.se);
  }
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                     mc::to_string(row.kind), row.param_name, fmt_num(row.param_value), row.n,
                     fmt_num(row.beta), has_gamma ? fmt_num(row.gamma) : "", fmt_num(row.m_e),
                     fmt_num(row.m_n), fmt_num(row.sigma), fmt_num(row.solved.share()),
                     fmt_num(row.solved.bonus_parameter()), row.solved.feasible ? "true" : "false",
                     fmt_num(row.solved.effort()), fmt_num(row.closed.dra_utility), mc_mean, mc_se,
                     fmt_num(row.closed.expected_falsification.front()),
                     fmt_num(row.closed.expected_payments.front()),
                     fmt_num(row.closed.customer_utilities.front()), fmt_num(row.e_pi_closed_sigma0));
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal demand-response contracts: solve, verify, simulate, sweep", "phantomdr"};
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> reps;
    std::string out;
    bool emit = false;
  };
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Configuration file");
    sub->add_option("--seed", common.seed, "Master seed (PHANTOMDR_SEED overrides)");
    sub->add_option("--reps", common.reps, "Monte Carlo replications")->check(CLI::PositiveNumber);
    sub->add_option("--out", common.out, "Output path (default stdout)");
    sub->add_flag("--emit-config", common.emit, "Print the effective configuration and exit");
  };

  CLI::App* solve = app.add_subcommand("solve", "Solve for the optimal contract");
  add_common(solve);

  CLI::App* verify_cmd = app.add_subcommand("verify", "Check a solved contract against oracles");
  add_common(verify_cmd);
  double perturb = 0.0;
  bool demo = false;
  verify_cmd->add_option("--perturb-effort", perturb, "Shift customer 0's effort before checking");
  verify_cmd->add_flag("--demo", demo, "Run the degenerate-contract demonstrations");

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo for one solved contract");
  add_common(simulate_cmd);
  bool antithetic = false;
  simulate_cmd->add_flag("--antithetic", antithetic, "Antithetic noise pairs");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Figure sweeps as CSV");
  add_common(sweep_cmd);
  std::string kind_text, betas, ns, gammas, ms;
  std::optional<double> r0;
  sweep_cmd->add_option("kind", kind_text, "fig2 | fig3 | fig4a | fig4b");
  sweep_cmd->add_option("--beta", betas, "Comma-separated beta values");
  sweep_cmd->add_option("--n", ns, "Customer counts, e.g. 1..20 or 1,2,5");
  sweep_cmd->add_option("--gamma", gammas, "Comma-separated reduction targets");
  sweep_cmd->add_option("--m", ms, "Comma-separated error means (fig4a: m_e, fig4b: m_n)");
  sweep_cmd->add_option("--r0", r0, "Linear-bonus reference report (fig2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig cfg = common.config.empty() ? RunConfig{} : load_config(common.config);
    if (common.seed) cfg.seed = *common.seed;
    if (const char* env = std::getenv("PHANTOMDR_SEED"); env && *env)
      cfg.seed = to_int<std::uint64_t>(env);
    if (common.reps) cfg.reps = *common.reps;
    if (antithetic) cfg.antithetic = true;
    if (sweep_cmd->parsed()) {
      if (!kind_text.empty()) cfg.sweep_kind = kind_text;
      if (!betas.empty()) cfg.sweep_betas = parse_real_list(betas);
      if (!ns.empty()) cfg.sweep_ns = parse_int_list(ns);
      if (!gammas.empty()) cfg.sweep_gammas = parse_real_list(gammas);
      if (!ms.empty()) cfg.sweep_error_means = parse_real_list(ms);
      if (r0) cfg.r0 = *r0;
    }
    if (common.emit) {
      out << emit_config(cfg);
      return kOk;
    }

    if (verify_cmd->parsed() && demo) {
      const auto checks = verify::demo_degenerate_contracts();
      print_checks(checks, out);
      for (const auto& c : checks)
        if (!c.passed) return kVerifyFailed;
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const mc::SweepKind kind = mc::parse_sweep_kind(cfg.sweep_kind);
      mc::GridSpec grid = grid_from(cfg);
      switch (kind) {
        case mc::SweepKind::fig2_beta_N:
          grid.betas = cfg.sweep_betas.empty() ? std::vector<double>{0.25, 0.5, 0.75} : cfg.sweep_betas;
          grid.ns = cfg.sweep_ns.empty() ? parse_int_list("1..20") : cfg.sweep_ns;
          break;
        case mc::SweepKind::fig3_gamma_N:
          grid.betas = cfg.sweep_betas.empty() ? std::vector<double>{cfg.beta} : cfg.sweep_betas;
          grid.ns = cfg.sweep_ns.empty() ? parse_int_list("1..15") : cfg.sweep_ns;
          grid.gammas = cfg.sweep_gammas.empty() ? std::vector<double>{0.3, 0.4} : cfg.sweep_gammas;
          break;
        case mc::SweepKind::fig4a_me:
        case mc::SweepKind::fig4b_mn:
          grid.gammas = cfg.sweep_gammas.empty() ? std::vector<double>{0.3, 0.4} : cfg.sweep_gammas;
          grid.error_means = cfg.sweep_error_means.empty()
                                 ? std::vector<double>{0.0, 0.025, 0.05, 0.075, 0.1}
                                 : cfg.sweep_error_means;
          break;
      }
      std::string csv = csv_header();
      for (const auto& row : mc::sweep(kind, grid, sim_from(cfg))) csv += csv_row(row);
      return write_output(common.out, csv, out, err) ? kOk : kUsage;
    }

    Solution sol = solve_config(cfg);

    if (solve->parsed()) {
      print_solution(sol, out);
      if (!common.out.empty() && !write_output(common.out, solution_csv(sol), out, err)) return kUsage;
      return sol.solved.feasible ? kOk : kInfeasible;
    }

    if (verify_cmd->parsed()) {
      if (perturb != 0.0) sol.solved.predicted_efforts.front() += perturb;
      std::vector<verify::CheckReport> checks = verify::run_suite(sol.scenario, sol.solved);
      if (sol.kind == mc::SweepKind::fig3_gamma_N && sol.solved.feasible) {
        checks.push_back(verify::constrained_search_diagnostic(cfg.n, cfg.beta, *cfg.gamma));
      }
      if (sol.kind == mc::SweepKind::fig4a_me) {
        checks.push_back(verify::me_coefficient_diagnostic(*cfg.gamma, cfg.m_e));
      }
      out << fmt::format("verify: {} (feasible={})\n", sol.solver, sol.solved.feasible ? "true" : "false");
      print_checks(checks, out);
      for (const auto& c : checks)
        if (!c.diagnostic && !c.passed) return kVerifyFailed;
      return kOk;
    }

    // simulate
    if (!sol.solved.feasible) {
      err << "infeasible contract:";
      for (const auto& why : sol.solved.infeasibility) err << " " << why << ";";
      err << "\n";
      return kInfeasible;
    }
    const mc::SweepRow row = mc::evaluate_point(sol.kind, cfg.n, cfg.beta, cfg.gamma.value_or(0.0),
                                                sol.kind == mc::SweepKind::fig4b_mn ? cfg.m_n : cfg.m_e,
                                                grid_from(cfg), sim_from(cfg));
    return write_output(common.out, csv_header() + csv_row(row), out, err) ? kOk : kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace phantomdr::cli
