#include "mrelay/model.hpp"

#include <cmath>

namespace mrelay {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::SmServeAll: return "sm";
    case Strategy::ScLatestAtExpiry: return "sc";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  if (text == "sm") return Strategy::SmServeAll;
  if (text == "sc") return Strategy::ScLatestAtExpiry;
  return std::nullopt;
}

ScenarioParams validate_params(const ScenarioParams& raw) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(raw.lambda) || !(raw.lambda > 0.0)) throw ParamError("lambda must be > 0");
  if (!finite(raw.t_m) || !(raw.t_m > 0.0)) throw ParamError("t_m must be > 0");
  if (!finite(raw.t_h) || !(raw.t_h >= 0.0)) throw ParamError("t_h must be >= 0");
  if (!finite(raw.p_s) || !(raw.p_s >= 0.0 && raw.p_s <= 1.0))
    throw ParamError("p_s must lie in [0,1]");
  if (!finite(raw.t_s) || !(raw.t_s >= 0.0)) throw ParamError("t_s must be >= 0");
  return raw;
}

SimConfig validate_config(const SimConfig& raw) {
  if (raw.rounds < 1) throw ParamError("rounds must be >= 1");
  if (raw.worker_hint && *raw.worker_hint < 1) throw ParamError("workers must be >= 1");
  return raw;
}

}  // namespace mrelay
