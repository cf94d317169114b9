#include <cmath>

#include "mrelay/numerics.hpp"

namespace mrelay::numerics {

double dilog_series(double x, double rel_tol) {
  if (x == 0.0) return 0.0;
  double sum = 0.0;
  double power = 1.0;
  for (int k = 1; k < 2000000; ++k) {
    power *= x;
    const double term = power / (static_cast<double>(k) * k);
    sum += term;
    if (std::fabs(term) <= rel_tol * std::fabs(sum)) break;
  }
  return sum;
}

namespace {

// Real Li2 on x <= 1.
double dilog_real(double x) {
  if (x == 1.0) return kPiSquaredOver6;
  if (x == 0.0) return 0.0;
  if (std::fabs(x) <= 0.5) return dilog_series(x);
  if (x > 0.5) {
    // Euler reflection: Li2(x) + Li2(1-x) = pi^2/6 - ln x ln(1-x)
    return kPiSquaredOver6 - std::log(x) * std::log1p(-x) - dilog_series(1.0 - x);
  }
  if (x >= -1.0) {
    // Landen: Li2(x) = -Li2(x/(x-1)) - ln^2(1-x)/2, with x/(x-1) in [1/3, 1/2]
    const double l = std::log1p(-x);
    return -dilog_series(x / (x - 1.0)) - 0.5 * l * l;
  }
  // x < -1: Li2(x) + Li2(1/x) = -pi^2/6 - ln^2(-x)/2
  const double l = std::log(-x);
  return -kPiSquaredOver6 - 0.5 * l * l - dilog_real(1.0 / x);
}

}  // namespace

ComplexValue dilog(double x) {
  if (x <= 1.0) return {dilog_real(x), 0.0};
  const double l = std::log(x);
  return {2.0 * kPiSquaredOver6 - 0.5 * l * l - dilog_real(1.0 / x), -kPi * l};
}

ComplexValue log_principal(double x) {
  if (x < 0.0) return {std::log(-x), kPi};
  return {std::log(x), 0.0};
}

double trunc_mean(double x, double lambda) {
  if (x <= 0.0) return 0.0;
  if (x < 1e-4) {
    // (1 - e^-x(1+x)) / (1 - e^-x) = x/2 - x^2/12 + O(x^4)
    return (x / 2.0 - x * x / 12.0) / lambda;
  }
  const double em1 = -std::expm1(-x);  // 1 - e^-x
  return (em1 - x * std::exp(-x)) / (lambda * em1);
}

}  // namespace mrelay::numerics
