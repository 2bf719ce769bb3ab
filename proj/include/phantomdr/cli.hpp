#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phantomdr/dra.hpp"
#include "phantomdr/model.hpp"
#include "phantomdr/montecarlo.hpp"

namespace phantomdr::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInfeasible = 2, kVerifyFailed = 3 };

/// Raised for malformed configuration; `what()` carries "config:LINE: ..." when
/// a line is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. Sections in the text form: [scenario], [contract],
/// [sim], [sweep].
struct RunConfig {
  // [scenario]
  int n = 1;
  double beta = 1.0;
  std::optional<double> gamma = 0.4;
  double m_e = 0.0;
  double m_n = 0.0;
  double sigma = 0.1;
  NoiseFamily noise = NoiseFamily::gaussian;
  // [contract]
  double r0 = 1.0;
  // [sim]
  std::int64_t reps = 100000;
  std::uint64_t seed = 0;
  bool antithetic = false;
  // [sweep]
  std::string sweep_kind = "fig3";
  std::vector<double> sweep_betas;
  std::vector<int> sweep_ns;
  std::vector<double> sweep_gammas;
  std::vector<double> sweep_error_means;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the key = value format. A config file must set scenario.n and
/// scenario.beta; everything else has defaults. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& c);

std::vector<double> parse_real_list(const std::string& text);
/// "1..20" or "1,2,5".
std::vector<int> parse_int_list(const std::string& text);

/// Which solver a config selects, and its output.
struct Solution {
  mc::SweepKind kind;
  std::string solver;
  Scenario scenario;
  SolvedContract solved;
};

Solution solve_config(const RunConfig& c);

/// 12 significant digits.
std::string fmt_num(double v);

std::string csv_header();
std::string csv_row(const mc::SweepRow& row);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phantomdr::cli
