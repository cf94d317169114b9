#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mrelay {

// Scenario parameters. Time is unitless; only products such as lambda*t_m matter.
struct ScenarioParams {
  double lambda = 1.0;  // fmBS arrival rate
  double t_m = 1.0;     // coverage window of a moving fmBS
  double t_h = 0.0;     // horizontal handoff overhead
  double p_s = 0.0;     // probability an arrival is a stopping one
  double t_s = 0.0;     // extra dwell of a stopping fmBS

  bool stopping() const { return p_s > 0.0 && t_s > 0.0; }
  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

enum class Strategy {
  SmServeAll,        // hand off at every catchable arrival
  ScLatestAtExpiry,  // ride to coverage expiry, then join the latest arrival in range
};

std::string_view to_string(Strategy s);
// Accepts "sm" / "sc" (case-sensitive).
std::optional<Strategy> parse_strategy(std::string_view text);

struct SimConfig {
  std::uint64_t rounds = 100000;
  std::uint64_t seed = 0;
  bool collect_traces = false;
  std::uint64_t trace_limit = 100;  // rounds whose traces are kept
  std::optional<int> worker_hint;
};

class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws ParamError naming the first violated bound; otherwise returns `raw` unchanged.
ScenarioParams validate_params(const ScenarioParams& raw);
SimConfig validate_config(const SimConfig& raw);

}  // namespace mrelay
