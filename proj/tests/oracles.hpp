#pragma once
// Independent oracles used only by the tests. None of these call into the
// analytic module.

#include <cmath>
#include <cstdint>
#include <random>

#include "mrelay/rng.hpp"

namespace oracle {

// E[K/(K+1) | K >= 1] * t_m with K ~ Poisson(lambda t_m), summed directly.
inline double max_uniform_mean_by_pmf(double lambda, double t_m) {
  const double mu = lambda * t_m;
  double pmf = std::exp(-mu);  // P{K = 0}
  double acc = 0.0;
  for (int k = 1; k < 400; ++k) {
    pmf *= mu / k;
    acc += pmf * k / (k + 1.0);
  }
  return acc / (1.0 - std::exp(-mu)) * t_m;
}

// sum_{k=1}^{n} (-1)^k / k^2, the alternating Basel series for Li2(-1).
inline double alternating_basel(long n) {
  double sum = 0.0;
  for (long k = n; k >= 1; --k) sum += (k % 2 ? -1.0 : 1.0) / (static_cast<double>(k) * k);
  return sum;
}

// Two-stage draw for E[t_1 | M >= 1]: tau_1 is the max of K >= 1 uniforms on
// (0, t_m], then t_1 is the max of K' >= 1 uniforms on (0, tau_1].
struct TwoStage {
  double tau1;
  double t1;
};

inline double conditioned_window_max(double w, double lambda, mrelay::Rng& rng) {
  std::poisson_distribution<long> count(lambda * w);
  long k = 0;
  while (k == 0) k = count(rng);
  return w * std::pow(rng.uniform(), 1.0 / static_cast<double>(k));
}

inline TwoStage two_stage_sample(double lambda, double t_m, mrelay::Rng& rng) {
  const double tau1 = conditioned_window_max(t_m, lambda, rng);
  return {tau1, conditioned_window_max(tau1, lambda, rng)};
}

// Number of successes before the first failure with failure probability q.
inline long geometric_trials(double q, mrelay::Rng& rng) {
  long n = 0;
  while (rng.uniform() >= q) ++n;
  return n;
}

}  // namespace oracle
