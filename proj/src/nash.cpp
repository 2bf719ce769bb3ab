#include "phantomdr/nash.hpp"

#include <stdexcept>

#include <fmt/core.h>

namespace phantomdr {

NashConstants nash_constants(int n, double beta) {
  if (n < 1 || !(beta > 0.0)) {
    throw std::invalid_argument(fmt::format("nash_constants: need n >= 1 and beta > 0, got n={} beta={}", n, beta));
  }
  const double nn = n;
  const double b1n = beta + 1.0 + nn;
  NashConstants k;
  k.n = n;
  k.beta = beta;
  // F first: A and B are defined through it.
  k.f_c = beta * (nn - 1.0) / (b1n * (beta + 1.0));
  const double bf = beta + k.f_c;
  const double b2 = beta + 2.0;
  k.a_c = bf / b1n;
  k.b_c = beta * bf / ((beta + 1.0) * b1n);
  k.c_c = 1.0 + 2.0 * bf * bf / (b2 * b2) - 2.0 * bf * k.f_c / b2 +
          beta * (4.0 - 4.0 * k.f_c + k.f_c * k.f_c) / (b2 * b2);
  const double ratio = beta / b1n;
  k.d_c = ratio * ratio / (k.c_c + (nn - 1.0) * k.b_c);
  k.e_c = nn / b1n;
  return k;
}

double NashConstants::effort_denominator() const { return c_c + (n - 1.0) * b_c; }

double NashConstants::share_lambda_coefficient() const {
  return a_c * (1.0 - 2.0 * n * d_c) + beta * (1.0 - 2.0 * e_c) / (beta + 1.0 + n);
}

double NashConstants::remark_denominator() const {
  return beta * (2.0 * e_c - 1.0) / (beta + 1.0 + n) + a_c;
}

double NashConstants::others_expected_reports(double lambda, double own_mean_x,
                                              double others_mean_x_sum) const {
  const double b1n = beta + 1.0 + n;
  const double g = lambda * (n - 1.0) / b1n +
                   beta * (beta + 2.0) * others_mean_x_sum / ((beta + 1.0) * b1n);
  return g - f_c * own_mean_x;
}

}  // namespace phantomdr
