#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <ostream>

#include "mrelay/harness.hpp"

namespace mrelay::harness {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace {

constexpr const char* kColumns[] = {"lambda", "tm",       "th",      "ps",       "ts",
                                    "strategy", "rounds", "seed",    "quantity", "analytic",
                                    "method", "sim_mean", "sim_ci95", "abs_err", "rel_err",
                                    "tier"};

const char* tier_name(Tier t) { return t == Tier::Hard ? "hard" : "soft"; }

// Quantity and method names never contain commas or quotes, so no CSV quoting.
void write_csv(const std::vector<CompareRow>& rows, std::ostream& os) {
  for (std::size_t i = 0; i < std::size(kColumns); ++i) os << (i ? "," : "") << kColumns[i];
  os << '\n';
  for (const CompareRow& r : rows) {
    os << format_number(r.params.lambda) << ',' << format_number(r.params.t_m) << ','
       << format_number(r.params.t_h) << ',' << format_number(r.params.p_s) << ','
       << format_number(r.params.t_s) << ',' << to_string(r.strategy) << ',' << r.rounds << ','
       << r.seed << ',' << r.quantity << ',' << format_number(r.analytic) << ',' << r.method << ','
       << format_number(r.sim_mean) << ',' << format_number(r.sim_ci95) << ','
       << format_number(r.abs_err) << ',' << format_number(r.rel_err) << ','
       << tier_name(r.tier) << '\n';
  }
}

json num(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double from_num(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

void write_json(const std::vector<CompareRow>& rows, std::ostream& os) {
  json doc = json::array();
  for (const CompareRow& r : rows) {
    json o = json::object();
    o["lambda"] = num(r.params.lambda);
    o["tm"] = num(r.params.t_m);
    o["th"] = num(r.params.t_h);
    o["ps"] = num(r.params.p_s);
    o["ts"] = num(r.params.t_s);
    o["strategy"] = std::string(to_string(r.strategy));
    o["rounds"] = r.rounds;
    o["seed"] = r.seed;
    o["quantity"] = r.quantity;
    o["analytic"] = num(r.analytic);
    o["method"] = r.method;
    o["sim_mean"] = num(r.sim_mean);
    o["sim_ci95"] = num(r.sim_ci95);
    o["abs_err"] = num(r.abs_err);
    o["rel_err"] = num(r.rel_err);
    o["tier"] = tier_name(r.tier);
    doc.push_back(std::move(o));
  }
  os << doc.dump(2) << '\n';
}

}  // namespace

void emit(const std::vector<CompareRow>& rows, Format format, std::ostream& os) {
  if (rows.empty()) throw std::invalid_argument("emit: no rows");
  if (format == Format::Csv)
    write_csv(rows, os);
  else
    write_json(rows, os);
}

void emit(const std::vector<CompareRow>& rows, Format format, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write output file " + path);
  emit(rows, format, os);
  os.flush();
  if (!os) throw std::runtime_error("failed writing output file " + path);
}

std::vector<CompareRow> parse_rows_json(const std::string& text) {
  const json doc = json::parse(text);
  std::vector<CompareRow> rows;
  for (const json& o : doc) {
    CompareRow r;
    r.params = {from_num(o.at("lambda")), from_num(o.at("tm")), from_num(o.at("th")),
                from_num(o.at("ps")), from_num(o.at("ts"))};
    const auto strategy = parse_strategy(o.at("strategy").get<std::string>());
    if (!strategy) throw std::runtime_error("parse_rows_json: bad strategy");
    r.strategy = *strategy;
    r.rounds = o.at("rounds").get<std::uint64_t>();
    r.seed = o.at("seed").get<std::uint64_t>();
    r.quantity = o.at("quantity").get<std::string>();
    r.analytic = from_num(o.at("analytic"));
    r.method = o.at("method").get<std::string>();
    r.sim_mean = from_num(o.at("sim_mean"));
    r.sim_ci95 = from_num(o.at("sim_ci95"));
    r.abs_err = from_num(o.at("abs_err"));
    r.rel_err = from_num(o.at("rel_err"));
    r.tier = o.at("tier").get<std::string>() == "hard" ? Tier::Hard : Tier::Soft;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mrelay::harness
