#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrelay/model.hpp"

namespace mrelay::harness {

enum class Command { Analytic, Simulate, Compare, Sweep };
enum class Format { Csv, Json };
enum class Tier { Hard, Soft };

// Axis values for every scenario field; scalars are one-element axes.
struct ParamGrid {
  std::vector<double> lambda{1.0};
  std::vector<double> t_m{1.0};
  std::vector<double> t_h{0.0};
  std::vector<double> p_s{0.0};
  std::vector<double> t_s{0.0};
  std::vector<Strategy> strategy{Strategy::SmServeAll};

  std::size_t size() const;
  // Cartesian product, each axis sorted ascending, first axis outermost.
  struct Point {
    ScenarioParams params;
    Strategy strategy;
  };
  std::vector<Point> points() const;
};

struct RunSpec {
  Command command = Command::Compare;
  ParamGrid grid;
  SimConfig sim;
  std::optional<std::string> out;
  Format format = Format::Csv;
  double quad_tol = 1e-9;
  double tail_tol = 1e-10;
  std::string echo;  // canonical flag form of the whole spec
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags override values from the optional JSON config document. Throws
// UsageError for unknown flags, malformed numbers, empty axes and parameter
// validation failures.
RunSpec parse_run_spec(const std::vector<std::string>& argv,
                       const std::optional<std::string>& config_json = std::nullopt);

struct CompareRow {
  ScenarioParams params;
  Strategy strategy = Strategy::SmServeAll;
  std::uint64_t rounds = 0;
  std::uint64_t seed = 0;
  std::string quantity;
  double analytic = 0.0;
  std::string method;
  double sim_mean = 0.0;
  double sim_ci95 = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  Tier tier = Tier::Soft;

  friend bool operator==(const CompareRow&, const CompareRow&);
};

inline constexpr double kRelErrFloor = 1e-12;
inline constexpr double kHardSigmas = 3.0;

// Fills abs_err and rel_err from analytic and sim_mean.
void fill_errors(CompareRow& row);
// Hard rows pass when |analytic - sim_mean| <= 3 standard errors.
bool hard_row_passes(const CompareRow& row);

std::vector<CompareRow> run_analytic(const RunSpec& spec);
std::vector<CompareRow> run_simulate(const RunSpec& spec);
std::vector<CompareRow> run_compare(const RunSpec& spec);
// Compare rows for every grid point in order.
std::vector<CompareRow> run_sweep(const RunSpec& spec);

std::string format_number(double v);  // 9 significant digits, "nan" for NaN
void emit(const std::vector<CompareRow>& rows, Format format, std::ostream& os);
// Writes to `path`; throws std::runtime_error if the file cannot be written.
void emit(const std::vector<CompareRow>& rows, Format format, const std::string& path);
std::vector<CompareRow> parse_rows_json(const std::string& text);

// Writes per-decision trace records of the first rounds to `path`.
void write_traces(const RunSpec& spec, const std::string& path);

// Full CLI entry: 0 success, 1 usage error, 2 hard-tier failure.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace mrelay::harness
