#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>

namespace mrelay::numerics {

using ComplexValue = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPiSquaredOver6 = kPi * kPi / 6.0;

/// Principal-branch dilogarithm Li2(x) for real x.
///
/// Real for x <= 1. For x > 1 the cut along (1, inf) is approached from below,
/// giving Im Li2(x) = -pi ln x. Every argument is reduced to |y| <= 1/2 where
/// the defining power series converges geometrically.
ComplexValue dilog(double x);

/// Raw power series sum_{k>=1} x^k / k^2, valid for |x| <= 1.
double dilog_series(double x, double rel_tol = 1e-17);

/// Principal log of a real argument; negative reals map to ln|x| + i pi.
ComplexValue log_principal(double x);

/// (1 - e^-x (1 + x)) / (lambda (1 - e^-x)): the mean of an Exp(lambda) variable
/// truncated at x / lambda. Continuous at x = 0 where it is 0.
double trunc_mean(double x, double lambda);

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double best_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate) {}
  double best_estimate() const { return best_estimate_; }

 private:
  double best_estimate_;
};

struct QuadratureOptions {
  int max_subdivisions = 4000;
};

/// Adaptive Gauss-Kronrod (7/15) quadrature on [a, b].
///
/// Globally adaptive: the piece with the largest error estimate is bisected
/// until the summed estimate is <= tol. Ties split leftmost first and the final
/// sum runs in interval order, so results are bit-reproducible. Throws
/// QuadratureError carrying the best estimate after `max_subdivisions` splits.
double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 QuadratureOptions opts = {});

struct MeanCI {
  double mean = 0.0;
  double std_error = 0.0;        // NaN when n < 2
  double ci95_half_width = 0.0;  // 1.96 * std_error
  std::size_t n = 0;

  bool ci_defined() const { return n >= 2; }
};

inline constexpr double kZ95 = 1.96;

/// Sample mean, standard error s / sqrt(n) and 95% half-width. Two-pass, in order.
MeanCI mean_ci(std::span<const double> samples);

struct TwoSampleResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;  // chi-square only
};

/// Chi-square test of homogeneity for two samples of non-negative counts.
/// Upper categories are pooled until every expected cell is >= 5.
TwoSampleResult chi_square_homogeneity(std::span<const long> a, std::span<const long> b);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.
/// Ties across samples are stepped together.
TwoSampleResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Kolmogorov survival function Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_q(double t);

}  // namespace mrelay::numerics
