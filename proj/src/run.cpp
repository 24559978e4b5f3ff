#include "netdesign/run.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "netdesign/errors.hpp"
#include "netdesign/tntp.hpp"

namespace netdesign {

void validate(const RunConfig& cfg) {
  if (!(cfg.gap_target > 0.0 && cfg.gap_target < 1.0)) {
    throw std::invalid_argument("gap target must lie in (0, 1), got " +
                                format_number(cfg.gap_target));
  }
  if (!(cfg.violation_target >= 0.0)) {
    throw std::invalid_argument("violation target must be nonnegative, got " +
                                format_number(cfg.violation_target));
  }
  if (!(cfg.time_limit_s > 0.0)) {
    throw std::invalid_argument("time limit must be positive, got " +
                                format_number(cfg.time_limit_s));
  }
  if (cfg.threads < 1) {
    throw std::invalid_argument("thread count must be at least 1, got " +
                                std::to_string(cfg.threads));
  }
}

RunOutcome run_solve(const NetworkInstance& inst, const RunConfig& cfg) {
  validate(cfg);
  RunOutcome out;
  BnbConfig bnb;
  bnb.mode = cfg.mode;
  bnb.gap_tol = cfg.gap_target;
  bnb.violation_tol = cfg.violation_target;
  bnb.time_limit_s = cfg.time_limit_s;
  bnb.on_event = [&out](const BnbEvent& e) { out.events.push_back(e); };
  out.result = solve_design_bnb(inst, bnb);
  return out;
}

namespace {

nlohmann::ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::ordered_json result_to_json(const RunConfig& cfg,
                                      const BnbResult& res) {
  nlohmann::ordered_json j;
  j["format"] = kResultFormatName;
  j["version"] = kResultFormatVersion;
  j["instance"] = cfg.instance_path;
  j["mode"] = to_string(cfg.mode);
  j["seed"] = cfg.seed;
  j["gap_target"] = cfg.gap_target;
  j["violation_target"] = cfg.violation_target;
  j["time_limit_s"] = cfg.time_limit_s;
  j["solved"] = res.solved;
  j["objective"] = finite_or_null(res.objective);
  j["lower_bound"] = finite_or_null(res.lower_bound);
  j["gap"] = finite_or_null(res.gap);
  j["violation"] = finite_or_null(res.violation);
  j["nodes"] = res.nodes;
  j["lmo_calls"] = res.total_lmo_calls;
  j["bpcg_iterations"] = res.total_bpcg_iterations;
  auto design = nlohmann::ordered_json::array();
  for (double y : res.design) design.push_back(y >= 0.5 ? 1 : 0);
  j["design"] = std::move(design);
  return j;
}

std::string write_result(const RunConfig& cfg, const BnbResult& res) {
  return result_to_json(cfg, res).dump(2) + "\n";
}

std::string events_to_csv(std::span<const BnbEvent> events) {
  std::string out = "time_s,event,value\n";
  for (const BnbEvent& e : events) {
    out += format_number(e.time_s);
    out += ',';
    out += e.event;
    out += ',';
    out += format_number(e.value);
    out += '\n';
  }
  return out;
}

namespace {

double parse_csv_double(const std::string& field, std::size_t line) {
  const char* begin = field.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError("bad number \"" + field + "\"", line);
  }
  return v;
}

}  // namespace

std::vector<BnbEvent> events_from_csv(const std::string& text) {
  std::vector<BnbEvent> events;
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string row = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line;
    if (line == 1) {
      if (row != "time_s,event,value") {
        throw ParseError("expected header time_s,event,value", line);
      }
      continue;
    }
    if (row.empty()) continue;
    std::size_t first = row.find(',');
    std::size_t last = row.rfind(',');
    if (first == std::string::npos || last == first) {
      throw ParseError("expected three comma-separated fields", line);
    }
    BnbEvent e;
    e.time_s = parse_csv_double(row.substr(0, first), line);
    e.event = row.substr(first + 1, last - first - 1);
    e.value = parse_csv_double(row.substr(last + 1), line);
    events.push_back(std::move(e));
  }
  if (line == 0) throw ParseError("expected header time_s,event,value", 1);
  return events;
}

}  // namespace netdesign
