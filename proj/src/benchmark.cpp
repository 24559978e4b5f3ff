#include "netdesign/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>
#include <utility>

#include "netdesign/errors.hpp"
#include "netdesign/instance_json.hpp"
#include "netdesign/tntp.hpp"

namespace netdesign {

namespace {

void apply_matrix_entry(BenchmarkRun& run, const nlohmann::json& obj) {
  if (!obj.is_object()) throw ParseError("benchmark entry must be an object");
  for (const auto& [key, value] : obj.items()) {
    try {
      if (key == "instance") {
        run.instance = value.get<std::string>();
      } else if (key == "mode") {
        try {
          run.mode = parse_solve_mode(value.get<std::string>());
        } catch (const std::invalid_argument& e) {
          throw ParseError(e.what());
        }
      } else if (key == "gap") {
        run.gap_target = value.get<double>();
      } else if (key == "violation") {
        run.violation_target = value.get<double>();
      } else if (key == "time_limit_s") {
        run.time_limit_s = value.get<double>();
      } else {
        throw ParseError("unknown benchmark key \"" + key + "\"");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("bad value for benchmark key \"" + key +
                       "\": " + e.what());
    }
  }
}

}  // namespace

std::vector<BenchmarkRun> benchmark_matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("runs") || !j.at("runs").is_array()) {
    throw ParseError("benchmark matrix must be an object with a \"runs\" array");
  }
  BenchmarkRun defaults;
  if (j.contains("defaults")) apply_matrix_entry(defaults, j.at("defaults"));
  std::vector<BenchmarkRun> runs;
  for (const auto& entry : j.at("runs")) {
    BenchmarkRun run = defaults;
    apply_matrix_entry(run, entry);
    if (run.instance.empty()) {
      throw ParseError("benchmark run needs an \"instance\" path");
    }
    runs.push_back(std::move(run));
  }
  if (runs.empty()) throw std::invalid_argument("benchmark matrix lists no runs");
  return runs;
}

std::vector<BenchmarkRun> load_benchmark_matrix(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("benchmark matrix: ") + e.what());
  }
  return benchmark_matrix_from_json(j);
}

namespace {

BenchmarkRow execute_one(const BenchmarkRun& run) {
  BenchmarkRow row;
  row.instance = run.instance;
  row.mode = to_string(run.mode);
  auto start = std::chrono::steady_clock::now();
  try {
    NetworkInstance inst = load_instance_file(run.instance);
    row.scenarios = inst.scenario_count();
    RunConfig cfg;
    cfg.instance_path = run.instance;
    cfg.mode = run.mode;
    cfg.gap_target = run.gap_target;
    cfg.violation_target = run.violation_target;
    cfg.time_limit_s = run.time_limit_s;
    RunOutcome out = run_solve(inst, cfg);
    row.solved = out.result.solved;
    row.time_s = out.result.wall_time_s;
    row.objective = out.result.objective;
    row.gap = out.result.gap;
  } catch (const std::exception& e) {
    row.solved = false;
    row.time_s = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
    row.objective = std::numeric_limits<double>::quiet_NaN();
    row.gap = std::numeric_limits<double>::quiet_NaN();
    row.error = e.what();
    // The CSV is line-based; keep the error on one line.
    std::replace(row.error.begin(), row.error.end(), '\n', ' ');
  }
  return row;
}

}  // namespace

std::vector<BenchmarkRow> run_benchmark(const std::vector<BenchmarkRun>& runs,
                                        int threads) {
  if (runs.empty()) throw std::invalid_argument("benchmark matrix lists no runs");
  if (threads < 1) {
    throw std::invalid_argument("thread count must be at least 1, got " +
                                std::to_string(threads));
  }
  std::vector<BenchmarkRow> rows(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      rows[i] = execute_one(runs[i]);
    }
  };
  std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), runs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return rows;
}

namespace {

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::vector<std::string> split_csv_row(const std::string& row,
                                       std::size_t line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < row.size(); ++i) {
    char c = row[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < row.size() && row[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"' && current.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line);
  fields.push_back(std::move(current));
  return fields;
}

double parse_csv_double(const std::string& field, std::size_t line) {
  const char* begin = field.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError("bad number \"" + field + "\"", line);
  }
  return v;
}

long parse_csv_long(const std::string& field, std::size_t line) {
  const char* begin = field.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw ParseError("bad integer \"" + field + "\"", line);
  }
  return v;
}

constexpr const char* kRowHeader =
    "instance,mode,scenarios,solved,time_s,objective,gap,error";

}  // namespace

std::string benchmark_rows_to_csv(std::span<const BenchmarkRow> rows) {
  std::string out = std::string(kRowHeader) + "\n";
  for (const BenchmarkRow& r : rows) {
    out += csv_field(r.instance);
    out += ',';
    out += r.mode;
    out += ',';
    out += std::to_string(r.scenarios);
    out += ',';
    out += r.solved ? '1' : '0';
    out += ',';
    out += format_number(r.time_s);
    out += ',';
    out += format_number(r.objective);
    out += ',';
    out += format_number(r.gap);
    out += ',';
    out += csv_field(r.error);
    out += '\n';
  }
  return out;
}

std::vector<BenchmarkRow> benchmark_rows_from_csv(const std::string& text) {
  std::vector<BenchmarkRow> rows;
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line;
    if (line == 1) {
      if (raw != kRowHeader) {
        throw ParseError(std::string("expected header ") + kRowHeader, line);
      }
      continue;
    }
    if (raw.empty()) continue;
    std::vector<std::string> fields = split_csv_row(raw, line);
    if (fields.size() != 8) {
      throw ParseError("expected 8 fields, got " +
                           std::to_string(fields.size()),
                       line);
    }
    BenchmarkRow row;
    row.instance = std::move(fields[0]);
    row.mode = std::move(fields[1]);
    row.scenarios = static_cast<int>(parse_csv_long(fields[2], line));
    long solved = parse_csv_long(fields[3], line);
    if (solved != 0 && solved != 1) {
      throw ParseError("solved flag must be 0 or 1", line);
    }
    row.solved = solved == 1;
    row.time_s = parse_csv_double(fields[4], line);
    row.objective = parse_csv_double(fields[5], line);
    row.gap = parse_csv_double(fields[6], line);
    row.error = std::move(fields[7]);
    rows.push_back(std::move(row));
  }
  if (line == 0) {
    throw ParseError(std::string("expected header ") + kRowHeader, 1);
  }
  return rows;
}

std::vector<CumulativePoint> cumulative_solved(
    std::span<const BenchmarkRow> rows) {
  std::map<std::string, std::vector<double>> times;
  for (const BenchmarkRow& r : rows) {
    if (r.solved) times[r.mode].push_back(r.time_s);
  }
  std::vector<CumulativePoint> points;
  for (auto& [mode, ts] : times) {
    std::sort(ts.begin(), ts.end());
    long count = 0;
    for (double t : ts) points.push_back({mode, t, ++count});
  }
  return points;
}

std::string cumulative_to_csv(std::span<const CumulativePoint> points) {
  std::string out = "mode,time_s,solved\n";
  for (const CumulativePoint& p : points) {
    out += p.mode;
    out += ',';
    out += format_number(p.time_s);
    out += ',';
    out += std::to_string(p.solved);
    out += '\n';
  }
  return out;
}

}  // namespace netdesign
