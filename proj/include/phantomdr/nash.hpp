#pragma once

namespace phantomdr {

/// Coefficients of the shared-bonus equilibrium for N customers with common
/// falsification weight beta. Naming follows the closed forms: a_c..f_c are
/// the six constants; e_c avoids a clash with the expectation operator.
struct NashConstants {
  int n = 1;
  double beta = 1.0;
  double a_c = 0.0;
  double b_c = 0.0;
  double c_c = 0.0;
  double d_c = 0.0;
  double e_c = 0.0;
  double f_c = 0.0;

  /// C + (N-1)B: maps (alpha_i + A lambda) to the symmetric effort.
  double effort_denominator() const;
  /// A(1 - 2ND) + beta(1 - 2E)/(beta + 1 + N): lambda coefficient in the share equation.
  double share_lambda_coefficient() const;
  /// beta(2E - 1)/(beta + 1 + N) + A, nonnegative for every valid (N, beta).
  double remark_denominator() const;

  /// Expected sum of the other customers' reports in the reporting
  /// equilibrium: G - F a_i, where the argument sums are of E[x_j].
  double others_expected_reports(double lambda, double own_mean_x,
                                 double others_mean_x_sum) const;
};

/// Throws std::invalid_argument unless n >= 1 and beta > 0.
NashConstants nash_constants(int n, double beta);

}  // namespace phantomdr
