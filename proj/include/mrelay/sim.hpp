#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mrelay/model.hpp"
#include "mrelay/numerics.hpp"
#include "mrelay/rng.hpp"

namespace mrelay::sim {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ArrivalEvent {
  double time = 0.0;
  bool stopping = false;
  double coverage_end = 0.0;  // time + t_m (+ t_s if stopping)
};

// One decision of a round. Under S_c the window is the candidate-collection
// interval ending at the current vehicle's coverage expiry; under S_m it is the
// current vehicle's catch window starting at its arrival.
struct TraceStep {
  int k = 0;
  double window = 0.0;        // w_k
  long arrivals = 0;          // K_k, arrivals inside the window
  double max_offset = kNaN;   // x_k, offset of the boarded arrival from window start
  double boarded_time = kNaN; // absolute arrival time of the boarded vehicle
  bool stop_flag = false;     // stop mark of the boarded vehicle
};

struct RoundOutcome {
  long m_handoffs = 0;
  long u_unserved = 0;
  double t2_duration = 0.0;
  double t1_duration = 0.0;
  // Ride time of each vehicle that ended in a horizontal handoff; the last
  // vehicle's ride is final_tail.
  std::vector<double> service_durations;
  double final_tail = 0.0;
  double first_offset = kNaN;   // x_1 when m >= 1
  double second_offset = kNaN;  // x_2 when m >= 2
  bool c0_stopping = false;
  std::vector<TraceStep> trace;
};

// Arrivals relative to the boarding of C0 at time 0. Either drawn lazily from
// an Rng (Poisson(lambda) with independent stop marks) or injected as a finite
// list for tests.
class ArrivalStream {
 public:
  ArrivalStream(const ScenarioParams& params, Rng& rng);

  struct Injected {
    double time;
    bool stopping = false;
  };
  // Throws std::invalid_argument unless times are strictly increasing and > 0.
  static ArrivalStream injected(const ScenarioParams& params, std::span<const Injected> arrivals,
                                bool c0_stopping = false, double t1_gap = 0.0);

  bool c0_stopping() const { return c0_stopping_; }
  double t1_gap() const { return t1_gap_; }
  double coverage(bool stopping) const;

  // Arrival i, or nullptr when an injected list is exhausted. The pointer is
  // invalidated by the next call.
  const ArrivalEvent* at(std::size_t i);

 private:
  ArrivalStream(const ScenarioParams& params, std::vector<ArrivalEvent> fixed, bool c0_stopping,
                double t1_gap);

  ScenarioParams params_;
  Rng* rng_ = nullptr;
  std::vector<ArrivalEvent> events_;
  double clock_ = 0.0;
  bool c0_stopping_ = false;
  double t1_gap_ = 0.0;
};

RoundOutcome simulate_round(const ScenarioParams& params, Strategy strategy,
                            ArrivalStream& arrivals, bool collect_trace = false);

// Independent S_c sampler built from window maxima: w_1 = t_m,
// K_k ~ Poisson(lambda w_k), x_k = w_k * max of K_k uniforms,
// w_{k+1} = t_m - w_k + x_k. Non-stopping scenarios only.
RoundOutcome window_recursion_round(const ScenarioParams& params, Rng& rng,
                                    bool collect_trace = false);

// S_m and S_c on one shared arrival realisation (non-stopping).
std::pair<RoundOutcome, RoundOutcome> coupled_round(const ScenarioParams& params, Rng& rng);

enum class RoundKernel { EventDriven, WindowRecursion };

// Per-round scalars in replication order.
struct RoundColumns {
  std::vector<double> m;
  std::vector<double> u;
  std::vector<double> t2;
  std::vector<double> t1;
  std::vector<double> x1;  // NaN when m < 1
  std::vector<double> x2;  // NaN when m < 2

  explicit RoundColumns(std::size_t n = 0);
  std::size_t size() const { return m.size(); }
};

struct RatioEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct SimSummary {
  ScenarioParams params;
  Strategy strategy = Strategy::SmServeAll;
  numerics::MeanCI m_handoffs;
  numerics::MeanCI u_unserved;
  numerics::MeanCI t2_duration;
  numerics::MeanCI t1_duration;
  numerics::MeanCI first_service_offset;  // x_1 | m >= 1
  numerics::MeanCI first_gap_offset;      // x_2 | m >= 2
  numerics::MeanCI no_handoff;            // indicator m == 0
  RatioEstimate r2;
  std::uint64_t seed = 0;
  std::uint64_t rounds = 0;
  bool experimental = false;  // S_c with stopping fmBSs
  std::vector<std::vector<TraceStep>> traces;
};

// Rounds in parallel with OpenMP; round i always uses Rng::for_stream(seed, i).
RoundColumns simulate_columns(const ScenarioParams& params, Strategy strategy,
                              const SimConfig& config,
                              RoundKernel kernel = RoundKernel::EventDriven);
// Serial reference for the kernel above.
RoundColumns simulate_columns_serial(const ScenarioParams& params, Strategy strategy,
                                     const SimConfig& config,
                                     RoundKernel kernel = RoundKernel::EventDriven);

SimSummary summarize(const RoundColumns& cols, const ScenarioParams& params, Strategy strategy,
                     const SimConfig& config);

SimSummary simulate_many(const ScenarioParams& params, Strategy strategy, const SimConfig& config);
SimSummary simulate_many_serial(const ScenarioParams& params, Strategy strategy,
                                const SimConfig& config);

// Ratio of totals (sum T2 - t_h sum M) / (sum T1 + sum T2) with a delta-method
// standard error.
RatioEstimate estimate_r2(const RoundColumns& cols, double t_h);
RatioEstimate estimate_r2(std::span<const RoundOutcome> outcomes, const ScenarioParams& params);

}  // namespace mrelay::sim
