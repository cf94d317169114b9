#include "mrelay/harness.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <sstream>

#include "mrelay/analytic.hpp"
#include "mrelay/sim.hpp"

namespace mrelay::harness {

using nlohmann::json;

std::size_t ParamGrid::size() const {
  return lambda.size() * t_m.size() * t_h.size() * p_s.size() * t_s.size() * strategy.size();
}

std::vector<ParamGrid::Point> ParamGrid::points() const {
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  std::vector<Strategy> strategies = strategy;
  std::sort(strategies.begin(), strategies.end(),
            [](Strategy a, Strategy b) { return to_string(a) < to_string(b); });
  std::vector<Point> out;
  out.reserve(size());
  for (double l : sorted(lambda))
    for (double m : sorted(t_m))
      for (double h : sorted(t_h))
        for (double ps : sorted(p_s))
          for (double ts : sorted(t_s))
            for (Strategy s : strategies) out.push_back({{l, m, h, ps, ts}, s});
  return out;
}

namespace {

double parse_number(const std::string& text, const std::string& field) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last)
    throw UsageError("malformed number for " + field + ": '" + text + "'");
  return v;
}

std::uint64_t parse_count(const std::string& text, const std::string& field) {
  std::uint64_t v = 0;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), last, v);
  if (text.empty() || ec != std::errc() || ptr != last)
    throw UsageError("malformed integer for " + field + ": '" + text + "'");
  return v;
}

std::vector<double> parse_axis(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, field));
  if (out.empty()) throw UsageError("empty axis for " + field);
  return out;
}

Strategy parse_strategy_or_throw(const std::string& text) {
  const auto s = parse_strategy(text);
  if (!s) throw UsageError("unknown strategy '" + text + "' (expected sm or sc)");
  return *s;
}

std::vector<Strategy> parse_strategy_axis(const std::string& text) {
  std::vector<Strategy> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_strategy_or_throw(item));
  if (out.empty()) throw UsageError("empty axis for strategy");
  return out;
}

std::vector<double> json_axis(const json& v, const std::string& field) {
  std::vector<double> out;
  auto one = [&](const json& x) {
    if (!x.is_number()) throw UsageError("config field " + field + " must be numeric");
    out.push_back(x.get<double>());
  };
  if (v.is_array()) {
    for (const json& x : v) one(x);
  } else {
    one(v);
  }
  if (out.empty()) throw UsageError("empty axis for " + field);
  return out;
}

void apply_config(RunSpec& spec, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config document: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "lambda") spec.grid.lambda = json_axis(value, key);
    else if (key == "tm") spec.grid.t_m = json_axis(value, key);
    else if (key == "th") spec.grid.t_h = json_axis(value, key);
    else if (key == "ps") spec.grid.p_s = json_axis(value, key);
    else if (key == "ts") spec.grid.t_s = json_axis(value, key);
    else if (key == "strategy") {
      spec.grid.strategy.clear();
      if (value.is_array()) {
        for (const json& s : value) spec.grid.strategy.push_back(parse_strategy_or_throw(s.get<std::string>()));
      } else {
        spec.grid.strategy.push_back(parse_strategy_or_throw(value.get<std::string>()));
      }
      if (spec.grid.strategy.empty()) throw UsageError("empty axis for strategy");
    } else if (key == "rounds") spec.sim.rounds = value.get<std::uint64_t>();
    else if (key == "seed") spec.sim.seed = value.get<std::uint64_t>();
    else if (key == "workers") spec.sim.worker_hint = value.get<int>();
    else if (key == "out") spec.out = value.get<std::string>();
    else if (key == "format") {
      const auto f = value.get<std::string>();
      if (f == "csv") spec.format = Format::Csv;
      else if (f == "json") spec.format = Format::Json;
      else throw UsageError("unknown format '" + f + "'");
    } else if (key == "traces") spec.sim.collect_traces = value.get<bool>();
    else throw UsageError("unknown config field '" + key + "'");
  }
}

std::string join_axis(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_number(xs[i]);
  return s;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Analytic: return "analytic";
    case Command::Simulate: return "simulate";
    case Command::Compare: return "compare";
    case Command::Sweep: return "sweep";
  }
  return "?";
}

std::string make_echo(const RunSpec& spec) {
  std::string strategies;
  for (std::size_t i = 0; i < spec.grid.strategy.size(); ++i)
    strategies += std::string(i ? "," : "") + std::string(to_string(spec.grid.strategy[i]));
  std::ostringstream os;
  os << command_name(spec.command) << " --lambda " << join_axis(spec.grid.lambda) << " --tm "
     << join_axis(spec.grid.t_m) << " --th " << join_axis(spec.grid.t_h) << " --ps "
     << join_axis(spec.grid.p_s) << " --ts " << join_axis(spec.grid.t_s) << " --strategy "
     << strategies << " --rounds " << spec.sim.rounds << " --seed " << spec.sim.seed
     << " --format " << (spec.format == Format::Csv ? "csv" : "json");
  if (spec.out) os << " --out " << *spec.out;
  if (spec.sim.collect_traces) os << " --traces";
  return os.str();
}

}  // namespace

RunSpec parse_run_spec(const std::vector<std::string>& argv,
                       const std::optional<std::string>& config_json) {
  if (argv.empty()) throw UsageError("missing command (analytic|simulate|compare|sweep)");
  RunSpec spec;
  const std::string& cmd = argv.front();
  if (cmd == "analytic") spec.command = Command::Analytic;
  else if (cmd == "simulate") spec.command = Command::Simulate;
  else if (cmd == "compare") spec.command = Command::Compare;
  else if (cmd == "sweep") spec.command = Command::Sweep;
  else throw UsageError("unknown command '" + cmd + "'");

  if (config_json) apply_config(spec, *config_json);

  CLI::App app{"mrelay " + cmd};
  std::optional<std::string> lambda, tm, th, ps, ts, strategy, rounds, seed, workers, out, format,
      trace_limit, config;
  bool traces = false;
  app.add_option("--lambda", lambda);
  app.add_option("--tm", tm);
  app.add_option("--th", th);
  app.add_option("--ps", ps);
  app.add_option("--ts", ts);
  app.add_option("--strategy", strategy);
  app.add_option("--rounds", rounds);
  app.add_option("--seed", seed);
  app.add_option("--workers", workers);
  app.add_option("--out", out);
  app.add_option("--format", format);
  app.add_option("--trace-limit", trace_limit);
  app.add_option("--config", config);  // read by run_cli
  app.add_flag("--traces", traces);

  std::vector<std::string> rest(argv.begin() + 1, argv.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (lambda) spec.grid.lambda = parse_axis(*lambda, "lambda");
  if (tm) spec.grid.t_m = parse_axis(*tm, "tm");
  if (th) spec.grid.t_h = parse_axis(*th, "th");
  if (ps) spec.grid.p_s = parse_axis(*ps, "ps");
  if (ts) spec.grid.t_s = parse_axis(*ts, "ts");
  if (strategy) spec.grid.strategy = parse_strategy_axis(*strategy);
  if (rounds) spec.sim.rounds = parse_count(*rounds, "rounds");
  if (seed) spec.sim.seed = parse_count(*seed, "seed");
  if (workers) spec.sim.worker_hint = static_cast<int>(parse_count(*workers, "workers"));
  if (trace_limit) spec.sim.trace_limit = parse_count(*trace_limit, "trace-limit");
  if (out) spec.out = *out;
  if (traces) spec.sim.collect_traces = true;
  if (format) {
    if (*format == "csv") spec.format = Format::Csv;
    else if (*format == "json") spec.format = Format::Json;
    else throw UsageError("unknown format '" + *format + "'");
  }

  if (spec.command != Command::Sweep && spec.grid.size() != 1)
    throw UsageError(cmd + " takes a single scenario; use sweep for grids");
  if (spec.sim.collect_traces && !spec.out) throw UsageError("--traces requires --out");
  try {
    validate_config(spec.sim);
    for (const auto& point : spec.grid.points()) validate_params(point.params);
  } catch (const ParamError& e) {
    throw UsageError(e.what());
  }
  spec.echo = make_echo(spec);
  return spec;
}

bool operator==(const CompareRow& a, const CompareRow& b) {
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.params == b.params && a.strategy == b.strategy && a.rounds == b.rounds &&
         a.seed == b.seed && a.quantity == b.quantity && same(a.analytic, b.analytic) &&
         a.method == b.method && same(a.sim_mean, b.sim_mean) && same(a.sim_ci95, b.sim_ci95) &&
         same(a.abs_err, b.abs_err) && same(a.rel_err, b.rel_err) && a.tier == b.tier;
}

void fill_errors(CompareRow& row) {
  row.abs_err = std::fabs(row.analytic - row.sim_mean);
  row.rel_err = row.abs_err / std::max(std::fabs(row.analytic), kRelErrFloor);
}

bool hard_row_passes(const CompareRow& row) {
  if (row.tier != Tier::Hard) return true;
  const double se = row.sim_ci95 / numerics::kZ95;
  return row.abs_err <= kHardSigmas * se + 1e-12;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RowFactory {
  const ScenarioParams& params;
  Strategy strategy;
  const SimConfig& sim;
  std::uint64_t rounds;

  CompareRow make(std::string quantity, double analytic, std::string method,
                  const numerics::MeanCI& observed, Tier tier) const {
    return make(std::move(quantity), analytic, std::move(method), observed.mean,
                observed.ci95_half_width, tier);
  }
  CompareRow make(std::string quantity, double analytic, std::string method, double sim_mean,
                  double sim_ci95, Tier tier) const {
    CompareRow row;
    row.params = params;
    row.strategy = strategy;
    row.rounds = rounds;
    row.seed = sim.seed;
    row.quantity = std::move(quantity);
    row.analytic = analytic;
    row.method = std::move(method);
    row.sim_mean = sim_mean;
    row.sim_ci95 = sim_ci95;
    row.tier = tier;
    fill_errors(row);
    return row;
  }
};

std::string flagged(std::string method, const analytic::Ratio& r) {
  return r.negative_warning ? method + ";negative" : method;
}

const numerics::MeanCI kNoSim{kNaN, kNaN, kNaN, 0};

std::vector<CompareRow> analytic_rows(const ScenarioParams& p, Strategy strategy,
                                      const RunSpec& spec) {
  namespace an = analytic;
  const an::AnalyticReport r = an::make_report(p, spec.quad_tol, spec.tail_tol);
  const RowFactory f{p, strategy, spec.sim, 0};
  std::vector<CompareRow> rows;
  auto add = [&](const char* q, double v, std::string m) {
    rows.push_back(f.make(q, v, std::move(m), kNoSim, Tier::Soft));
  };
  add("p_v", r.p_v, "exact");
  add("e_tau1_sc", r.e_tau1_sc, "exact");
  add("e_t1_sc", r.e_t1_sc, "quadrature");
  add("e_t1_sc", r.e_t1_sc_closed_form, "closed_form");
  add("t1_closed_form_deviation", r.t1_closed_form_deviation, "closed_form-quadrature");
  add("e_m_sm", r.e_m_sm, "exact");
  add("e_m_sc", r.e_m_sc, "approx");
  add("r2_sc", r.r2_sc.value, flagged("approx", r.r2_sc));
  add("p_s_prime", r.p_s_prime, "exact");
  add("delta", r.delta, "exact");
  add("p_v_hat_1", r.p_v_hat_1, "exact");
  add("p_v_hat_2", r.p_v_hat_2, "exact");
  add("e_m_sm_stop_sum", r.e_m_sm_stop_sum, "truncated_sum");
  add("truncation_terms", static_cast<double>(r.truncation_terms), "truncated_sum");
  add("e_m_sm_stop_geo", r.e_m_sm_stop_geo, "geometric_approx");
  add("e_tau_sm_stop_1", r.e_tau_sm_stop_1, "approx");
  add("e_tau_sm_stop_2", r.e_tau_sm_stop_2, "approx");
  add("a2_tilde", r.a2_tilde, "approx");
  add("r2_sm_stop", r.r2_sm_stop.value, flagged("approx", r.r2_sm_stop));
  return rows;
}

std::vector<CompareRow> simulate_rows(const sim::SimSummary& s, const SimConfig& config) {
  const RowFactory f{s.params, s.strategy, config, s.rounds};
  const std::string method = s.experimental ? "sim;experimental" : "sim";
  std::vector<CompareRow> rows;
  auto add = [&](const char* q, const numerics::MeanCI& m) {
    rows.push_back(f.make(q, kNaN, method, m, Tier::Soft));
  };
  add("m_handoffs", s.m_handoffs);
  add("u_unserved", s.u_unserved);
  add("t2_duration", s.t2_duration);
  add("t1_duration", s.t1_duration);
  add("first_service_offset", s.first_service_offset);
  add("first_gap_offset", s.first_gap_offset);
  add("no_handoff", s.no_handoff);
  rows.push_back(f.make("r2", kNaN, method, s.r2.value, numerics::kZ95 * s.r2.std_error, Tier::Soft));
  return rows;
}

std::vector<CompareRow> compare_rows(const ScenarioParams& p, Strategy strategy,
                                     const RunSpec& spec) {
  namespace an = analytic;
  const sim::SimSummary s = sim::simulate_many(p, strategy, spec.sim);
  const RowFactory f{p, strategy, spec.sim, s.rounds};
  const double r2_ci = numerics::kZ95 * s.r2.std_error;
  std::vector<CompareRow> rows;

  rows.push_back(f.make("E[T1]", 1.0 / p.lambda, "exact", s.t1_duration, Tier::Hard));

  if (s.experimental) {
    // No closed forms exist for S_c with stopping fmBSs.
    for (CompareRow row : simulate_rows(s, spec.sim)) {
      row.method = "experimental";
      rows.push_back(std::move(row));
    }
    return rows;
  }

  if (p.stopping()) {
    const an::TruncatedSum sum = an::expected_handoffs_sm_stopping_sum(p, spec.tail_tol);
    rows.push_back(f.make("P_V", an::p_vertical_hat(p, 1), "exact", s.no_handoff, Tier::Hard));
    rows.push_back(f.make("E[M]", sum.value, "truncated_sum", s.m_handoffs, Tier::Soft));
    rows.push_back(f.make("E[M]", an::expected_handoffs_sm_stopping_geo(p), "geometric_approx",
                          s.m_handoffs, Tier::Soft));
    rows.push_back(f.make("E[tau1|M>=1]", an::expected_service_sm_stopping(p, 1), "approx",
                          s.first_service_offset, Tier::Soft));
    rows.push_back(f.make("E[tau2|M>=2]", an::expected_service_sm_stopping(p, 2), "approx",
                          s.first_gap_offset, Tier::Soft));
    rows.push_back(f.make("E[T2]", an::expected_t2_stopping(p), "approx", s.t2_duration, Tier::Soft));
    const an::Ratio r2 = an::ratio_t2_sm_stopping(p);
    rows.push_back(f.make("R2", r2.value, flagged("approx", r2), s.r2.value, r2_ci, Tier::Soft));
    return rows;
  }

  const double pv = an::p_vertical(p);
  const double e_t2 = (1.0 - pv) / (p.lambda * pv);
  rows.push_back(f.make("P_V", pv, "exact", s.no_handoff, Tier::Hard));
  rows.push_back(f.make("E[T2]", e_t2, "exact", s.t2_duration, Tier::Hard));

  if (strategy == Strategy::SmServeAll) {
    const double e_m = an::expected_handoffs_sm(p);
    const double r2 = (e_t2 - p.t_h * e_m) / (1.0 / p.lambda + e_t2);
    rows.push_back(f.make("E[M]", e_m, "exact", s.m_handoffs, Tier::Hard));
    rows.push_back(f.make("E[U]", 0.0, "exact", s.u_unserved, Tier::Hard));
    rows.push_back(f.make("R2", r2, "exact", s.r2.value, r2_ci, Tier::Hard));
    return rows;
  }

  const double t1_quad = an::expected_t1_sc(p, an::T1Method::Quadrature, spec.quad_tol);
  const double e_m_sc = an::expected_handoffs_sc(p);
  rows.push_back(f.make("E[tau1|M>=1]", an::expected_tau1_sc(p), "exact", s.first_service_offset,
                        Tier::Hard));
  rows.push_back(f.make("E[t1|M>=1]", t1_quad, "quadrature", s.first_gap_offset, Tier::Soft));
  rows.push_back(f.make("E[t1|M>=1]", an::expected_t1_sc(p, an::T1Method::ClosedForm),
                        "closed_form", s.first_gap_offset, Tier::Soft));
  rows.push_back(f.make("E[M]", e_m_sc, "approx", s.m_handoffs, Tier::Soft));
  rows.push_back(f.make("E[U]", an::expected_unserved_per_round(p, e_m_sc), "approx",
                        s.u_unserved, Tier::Soft));
  const an::Ratio r2 = an::ratio_t2_sc(p);
  // With no handoff cost the ratio reduces to 1 - P_V, which is exact.
  const bool exact = p.t_h == 0.0;
  rows.push_back(f.make("R2", r2.value, flagged(exact ? "exact" : "approx", r2), s.r2.value, r2_ci,
                        exact ? Tier::Hard : Tier::Soft));
  return rows;
}

}  // namespace

std::vector<CompareRow> run_analytic(const RunSpec& spec) {
  std::vector<CompareRow> rows;
  for (const auto& pt : spec.grid.points()) {
    auto more = analytic_rows(validate_params(pt.params), pt.strategy, spec);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  return rows;
}

std::vector<CompareRow> run_simulate(const RunSpec& spec) {
  std::vector<CompareRow> rows;
  for (const auto& pt : spec.grid.points()) {
    auto more = simulate_rows(sim::simulate_many(pt.params, pt.strategy, spec.sim), spec.sim);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  return rows;
}

std::vector<CompareRow> run_compare(const RunSpec& spec) {
  if (spec.grid.size() != 1) throw UsageError("compare takes a single scenario");
  const auto pt = spec.grid.points().front();
  return compare_rows(validate_params(pt.params), pt.strategy, spec);
}

std::vector<CompareRow> run_sweep(const RunSpec& spec) {
  std::vector<CompareRow> rows;
  for (const auto& pt : spec.grid.points()) {
    auto more = compare_rows(validate_params(pt.params), pt.strategy, spec);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  return rows;
}

void write_traces(const RunSpec& spec, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write trace file " + path);
  os << "lambda,tm,th,ps,ts,strategy,round,k,w_k,K_k,x_k,boarded_arrival_time,stop_flag\n";
  // Round i draws from stream i, so the first rounds replay exactly.
  SimConfig head = spec.sim;
  head.rounds = std::max<std::uint64_t>(1, std::min(spec.sim.rounds, spec.sim.trace_limit));
  head.collect_traces = true;
  for (const auto& pt : spec.grid.points()) {
    const sim::SimSummary s = sim::simulate_many(pt.params, pt.strategy, head);
    for (std::size_t r = 0; r < s.traces.size(); ++r)
      for (const sim::TraceStep& step : s.traces[r])
        os << format_number(pt.params.lambda) << ',' << format_number(pt.params.t_m) << ','
           << format_number(pt.params.t_h) << ',' << format_number(pt.params.p_s) << ','
           << format_number(pt.params.t_s) << ',' << to_string(pt.strategy) << ',' << r << ','
           << step.k << ',' << format_number(step.window) << ',' << step.arrivals << ','
           << format_number(step.max_offset) << ',' << format_number(step.boarded_time) << ','
           << (step.stop_flag ? 1 : 0) << '\n';
  }
  if (!os) throw std::runtime_error("failed writing trace file " + path);
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  RunSpec spec;
  try {
    std::optional<std::string> config;
    for (std::size_t i = 1; i + 1 < argv.size(); ++i) {
      if (argv[i] == "--config") {
        std::ifstream in(argv[i + 1]);
        if (!in) throw UsageError("cannot read config document " + argv[i + 1]);
        std::stringstream buf;
        buf << in.rdbuf();
        config = buf.str();
      }
    }
    spec = parse_run_spec(argv, config);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n"
        << "usage: mrelay {analytic|simulate|compare|sweep} [--lambda L] [--tm T] [--th H] "
           "[--ps P] [--ts S] [--strategy sm|sc] [--rounds N] [--seed S] [--workers W] "
           "[--out PATH] [--format csv|json] [--traces] [--trace-limit N] [--config FILE]\n";
    return 1;
  }

  err << "# mrelay " << spec.echo << "\n";
  std::vector<CompareRow> rows;
  try {
    switch (spec.command) {
      case Command::Analytic: rows = run_analytic(spec); break;
      case Command::Simulate: rows = run_simulate(spec); break;
      case Command::Compare: rows = run_compare(spec); break;
      case Command::Sweep: rows = run_sweep(spec); break;
    }
    if (spec.out) {
      emit(rows, spec.format, *spec.out);
      if (spec.sim.collect_traces) write_traces(spec, *spec.out + ".traces.csv");
    } else {
      emit(rows, spec.format, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  int failures = 0;
  for (const CompareRow& row : rows)
    if (!hard_row_passes(row)) {
      ++failures;
      err << "hard-tier failure: " << row.quantity << " analytic=" << format_number(row.analytic)
          << " sim=" << format_number(row.sim_mean) << " ci95=" << format_number(row.sim_ci95)
          << "\n";
    }
  return failures == 0 ? 0 : 2;
}

}  // namespace mrelay::harness
