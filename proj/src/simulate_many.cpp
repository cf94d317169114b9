#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mrelay/sim.hpp"

namespace mrelay::sim {

RoundColumns::RoundColumns(std::size_t n) : m(n), u(n), t2(n), t1(n), x1(n), x2(n) {}

namespace {

RoundOutcome run_one(const ScenarioParams& params, Strategy strategy, RoundKernel kernel,
                     std::uint64_t seed, std::uint64_t index, bool trace) {
  Rng rng = Rng::for_stream(seed, index);
  if (kernel == RoundKernel::WindowRecursion) return window_recursion_round(params, rng, trace);
  ArrivalStream arrivals(params, rng);
  return simulate_round(params, strategy, arrivals, trace);
}

void store(RoundColumns& cols, std::size_t i, const RoundOutcome& r) {
  cols.m[i] = static_cast<double>(r.m_handoffs);
  cols.u[i] = static_cast<double>(r.u_unserved);
  cols.t2[i] = r.t2_duration;
  cols.t1[i] = r.t1_duration;
  cols.x1[i] = r.first_offset;
  cols.x2[i] = r.second_offset;
}

void check_kernel(const ScenarioParams& params, RoundKernel kernel) {
  if (kernel == RoundKernel::WindowRecursion && params.stopping())
    throw std::invalid_argument("window recursion kernel supports non-stopping scenarios only");
}

std::vector<double> present(const std::vector<double>& xs) {
  std::vector<double> out;
  for (double x : xs)
    if (!std::isnan(x)) out.push_back(x);
  return out;
}

numerics::MeanCI mean_ci_or_empty(const std::vector<double>& xs) {
  if (xs.empty()) return {kNaN, kNaN, kNaN, 0};
  return numerics::mean_ci(xs);
}

}  // namespace

RoundColumns simulate_columns(const ScenarioParams& params, Strategy strategy,
                              const SimConfig& config, RoundKernel kernel) {
  validate_config(config);
  check_kernel(params, kernel);
  const auto n = static_cast<std::int64_t>(config.rounds);
  RoundColumns cols(config.rounds);
  const int workers = config.worker_hint.value_or(omp_get_max_threads());
#pragma omp parallel for schedule(static) num_threads(workers)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    store(cols, idx, run_one(params, strategy, kernel, config.seed, idx, false));
  }
  return cols;
}

RoundColumns simulate_columns_serial(const ScenarioParams& params, Strategy strategy,
                                     const SimConfig& config, RoundKernel kernel) {
  validate_config(config);
  check_kernel(params, kernel);
  RoundColumns cols(config.rounds);
  for (std::uint64_t i = 0; i < config.rounds; ++i)
    store(cols, i, run_one(params, strategy, kernel, config.seed, i, false));
  return cols;
}

RatioEstimate estimate_r2(const RoundColumns& cols, double t_h) {
  const std::size_t n = cols.size();
  if (n == 0) throw std::invalid_argument("estimate_r2: no rounds");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += cols.t2[i] - t_h * cols.m[i];
    den += cols.t1[i] + cols.t2[i];
  }
  RatioEstimate out;
  out.value = num / den;
  if (n < 2) {
    out.std_error = kNaN;
    return out;
  }
  // Var(R) ~ Var(Y - R X) / (n Xbar^2)
  const double mean_den = den / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid =
        (cols.t2[i] - t_h * cols.m[i]) - out.value * (cols.t1[i] + cols.t2[i]);
    ss += resid * resid;
  }
  const double var = ss / static_cast<double>(n - 1);
  out.std_error = std::sqrt(var / static_cast<double>(n)) / mean_den;
  return out;
}

RatioEstimate estimate_r2(std::span<const RoundOutcome> outcomes, const ScenarioParams& params) {
  RoundColumns cols(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) store(cols, i, outcomes[i]);
  return estimate_r2(cols, params.t_h);
}

SimSummary summarize(const RoundColumns& cols, const ScenarioParams& params, Strategy strategy,
                     const SimConfig& config) {
  SimSummary s;
  s.params = params;
  s.strategy = strategy;
  s.seed = config.seed;
  s.rounds = cols.size();
  s.experimental = strategy == Strategy::ScLatestAtExpiry && params.stopping();
  s.m_handoffs = numerics::mean_ci(cols.m);
  s.u_unserved = numerics::mean_ci(cols.u);
  s.t2_duration = numerics::mean_ci(cols.t2);
  s.t1_duration = numerics::mean_ci(cols.t1);
  s.first_service_offset = mean_ci_or_empty(present(cols.x1));
  s.first_gap_offset = mean_ci_or_empty(present(cols.x2));
  std::vector<double> zero(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) zero[i] = cols.m[i] == 0.0 ? 1.0 : 0.0;
  s.no_handoff = numerics::mean_ci(zero);
  s.r2 = estimate_r2(cols, params.t_h);
  return s;
}

namespace {

SimSummary with_traces(SimSummary s, const ScenarioParams& params, Strategy strategy,
                       const SimConfig& config) {
  if (!config.collect_traces) return s;
  const std::uint64_t n = std::min(config.rounds, config.trace_limit);
  s.traces.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i)
    s.traces.push_back(
        run_one(params, strategy, RoundKernel::EventDriven, config.seed, i, true).trace);
  return s;
}

}  // namespace

SimSummary simulate_many(const ScenarioParams& params, Strategy strategy, const SimConfig& config) {
  const ScenarioParams p = validate_params(params);
  return with_traces(summarize(simulate_columns(p, strategy, config), p, strategy, config), p,
                     strategy, config);
}

SimSummary simulate_many_serial(const ScenarioParams& params, Strategy strategy,
                                const SimConfig& config) {
  const ScenarioParams p = validate_params(params);
  return with_traces(summarize(simulate_columns_serial(p, strategy, config), p, strategy, config),
                     p, strategy, config);
}

}  // namespace mrelay::sim
