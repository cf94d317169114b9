#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

#include "mrelay/sim.hpp"

namespace mrelay::sim {

ArrivalStream::ArrivalStream(const ScenarioParams& params, Rng& rng)
    : params_(params), rng_(&rng) {
  t1_gap_ = rng.exponential(params.lambda);
  c0_stopping_ = rng.bernoulli(params.p_s);
}

ArrivalStream::ArrivalStream(const ScenarioParams& params, std::vector<ArrivalEvent> fixed,
                             bool c0_stopping, double t1_gap)
    : params_(params), events_(std::move(fixed)), c0_stopping_(c0_stopping), t1_gap_(t1_gap) {}

ArrivalStream ArrivalStream::injected(const ScenarioParams& params,
                                      std::span<const Injected> arrivals, bool c0_stopping,
                                      double t1_gap) {
  std::vector<ArrivalEvent> events;
  events.reserve(arrivals.size());
  double last = 0.0;
  for (const Injected& a : arrivals) {
    if (!(a.time > last))
      throw std::invalid_argument("injected arrivals must be strictly increasing and > 0");
    last = a.time;
    events.push_back({a.time, a.stopping, 0.0});
  }
  ArrivalStream stream(params, std::move(events), c0_stopping, t1_gap);
  for (ArrivalEvent& e : stream.events_) e.coverage_end = e.time + stream.coverage(e.stopping);
  return stream;
}

double ArrivalStream::coverage(bool stopping) const {
  return stopping ? params_.t_m + params_.t_s : params_.t_m;
}

const ArrivalEvent* ArrivalStream::at(std::size_t i) {
  while (rng_ != nullptr && events_.size() <= i) {
    clock_ += rng_->exponential(params_.lambda);
    const bool stopping = rng_->bernoulli(params_.p_s);
    events_.push_back({clock_, stopping, clock_ + coverage(stopping)});
  }
  return i < events_.size() ? &events_[i] : nullptr;
}

namespace {

void record_offset(RoundOutcome& out, double offset) {
  if (out.m_handoffs == 1) out.first_offset = offset;
  if (out.m_handoffs == 2) out.second_offset = offset;
}

// Number of arrivals with index >= from and time in (.., end].
long count_until(ArrivalStream& arrivals, std::size_t from, double end) {
  long n = 0;
  for (std::size_t i = from;; ++i) {
    const ArrivalEvent* a = arrivals.at(i);
    if (a == nullptr || a->time > end) return n;
    ++n;
  }
}

RoundOutcome serve_all(const ScenarioParams& p, ArrivalStream& arrivals, bool collect_trace) {
  RoundOutcome out;
  out.c0_stopping = arrivals.c0_stopping();
  double boarded = 0.0;
  bool stopped = out.c0_stopping;
  double segment_start = 0.0;
  std::size_t next = 0;
  for (int k = 1;; ++k) {
    const double catch_moving = boarded + p.t_m;
    const double catch_stopping = boarded + arrivals.coverage(stopped);
    const double horizon = std::max(catch_moving, catch_stopping);

    std::optional<ArrivalEvent> target;
    std::size_t i = next;
    for (;; ++i) {
      const ArrivalEvent* a = arrivals.at(i);
      if (a == nullptr || a->time > horizon) break;
      if (a->time <= (a->stopping ? catch_stopping : catch_moving)) {
        target = *a;
        break;
      }
      ++out.u_unserved;
    }

    if (collect_trace) {
      TraceStep step;
      step.k = k;
      step.window = horizon - boarded;
      step.arrivals = count_until(arrivals, next, horizon);
      if (target) {
        step.max_offset = target->time - boarded;
        step.boarded_time = target->time;
        step.stop_flag = target->stopping;
      }
      out.trace.push_back(step);
    }

    if (!target) {
      out.t2_duration = boarded + arrivals.coverage(stopped);
      out.final_tail = out.t2_duration - segment_start;
      // skipped arrivals past the last catchable one were already counted
      return out;
    }
    ++out.m_handoffs;
    record_offset(out, target->time - boarded);
    out.service_durations.push_back(target->time - segment_start);
    segment_start = target->time;
    boarded = target->time;
    stopped = target->stopping;
    next = i + 1;
  }
}

RoundOutcome latest_at_expiry(ArrivalStream& arrivals, bool collect_trace) {
  RoundOutcome out;
  out.c0_stopping = arrivals.c0_stopping();
  double boarded = 0.0;
  double expiry = arrivals.coverage(out.c0_stopping);
  double previous_decision = 0.0;
  std::size_t next = 0;
  for (int k = 1;; ++k) {
    // Arrivals in (max(boarded, previous_decision), expiry]; candidates are
    // those still covering the user at the decision time.
    std::optional<ArrivalEvent> target;
    long in_window = 0;
    std::size_t i = next;
    for (;; ++i) {
      const ArrivalEvent* a = arrivals.at(i);
      if (a == nullptr || a->time > expiry) break;
      ++in_window;
      if (a->coverage_end > expiry) target = *a;
    }
    const double window_start = std::max(boarded, previous_decision);

    if (collect_trace) {
      TraceStep step;
      step.k = k;
      step.window = expiry - window_start;
      step.arrivals = in_window;
      if (target) {
        step.max_offset = target->time - window_start;
        step.boarded_time = target->time;
        step.stop_flag = target->stopping;
      }
      out.trace.push_back(step);
    }

    if (!target) {
      out.u_unserved += in_window;
      out.t2_duration = expiry;
      out.final_tail = expiry - previous_decision;
      return out;
    }
    out.u_unserved += in_window - 1;
    ++out.m_handoffs;
    record_offset(out, target->time - window_start);
    out.service_durations.push_back(expiry - previous_decision);
    previous_decision = expiry;
    boarded = target->time;
    expiry = target->coverage_end;
    next = i;
  }
}

}  // namespace

RoundOutcome simulate_round(const ScenarioParams& params, Strategy strategy,
                            ArrivalStream& arrivals, bool collect_trace) {
  RoundOutcome out = strategy == Strategy::SmServeAll
                         ? serve_all(params, arrivals, collect_trace)
                         : latest_at_expiry(arrivals, collect_trace);
  out.t1_duration = arrivals.t1_gap();
  return out;
}

RoundOutcome window_recursion_round(const ScenarioParams& params, Rng& rng, bool collect_trace) {
  RoundOutcome out;
  out.t1_duration = rng.exponential(params.lambda);
  double window = params.t_m;
  double decision = params.t_m;
  for (int k = 1;; ++k) {
    std::poisson_distribution<long> count(params.lambda * window);
    const long K = count(rng);
    TraceStep step;
    step.k = k;
    step.window = window;
    step.arrivals = K;
    if (K == 0) {
      if (collect_trace) out.trace.push_back(step);
      out.t2_duration = decision;
      out.final_tail = window;
      return out;
    }
    // max of K iid U(0,1) is U^{1/K}
    const double offset = window * std::pow(rng.uniform(), 1.0 / static_cast<double>(K));
    step.max_offset = offset;
    step.boarded_time = decision - window + offset;
    if (collect_trace) out.trace.push_back(step);

    ++out.m_handoffs;
    out.u_unserved += K - 1;
    record_offset(out, offset);
    out.service_durations.push_back(window);
    const double next_window = params.t_m - window + offset;
    decision += next_window;
    window = next_window;
  }
}

std::pair<RoundOutcome, RoundOutcome> coupled_round(const ScenarioParams& params, Rng& rng) {
  ArrivalStream arrivals(params, rng);
  RoundOutcome sm = simulate_round(params, Strategy::SmServeAll, arrivals);
  RoundOutcome sc = simulate_round(params, Strategy::ScLatestAtExpiry, arrivals);
  return {std::move(sm), std::move(sc)};
}

}  // namespace mrelay::sim
