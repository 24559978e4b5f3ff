#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "netdesign/benchmark.hpp"
#include "netdesign/bnb.hpp"
#include "netdesign/errors.hpp"
#include "netdesign/instance_json.hpp"
#include "netdesign/rng.hpp"
#include "netdesign/run.hpp"
#include "support/toy.hpp"

using namespace netdesign;
using namespace netdesign::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NetworkInstance small_design_instance(std::uint64_t seed, int scenarios = 1) {
  SplitMix64 rng(seed);
  RandomInstanceParams prm;
  prm.nodes = 6;
  prm.extra_edges = 8;
  prm.zone_count = 2;
  prm.origin_count = 2;
  prm.scenario_count = scenarios;
  prm.removable_count = 3;
  prm.demand_lo = 1.0;
  prm.demand_hi = 4.0;
  return random_instance(rng, prm);
}

// Scratch space under the system temp dir, wiped on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("run configurations are validated") {
  RunConfig good;
  good.instance_path = "x.json";
  CHECK_NOTHROW(validate(good));

  RunConfig cfg = good;
  cfg.gap_target = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.gap_target = 1.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.gap_target = -0.2;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = good;
  cfg.violation_target = -1e-9;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = good;
  cfg.time_limit_s = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = good;
  cfg.threads = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("run_solve matches a direct branch-and-bound call") {
  NetworkInstance inst = small_design_instance(0x5eedbeefu);

  RunConfig cfg;
  cfg.instance_path = "mem.json";
  cfg.mode = SolveMode::benders;
  cfg.gap_target = 0.01;
  RunOutcome out = run_solve(inst, cfg);

  BnbConfig direct;
  direct.mode = SolveMode::benders;
  direct.gap_tol = 0.01;
  std::vector<BnbEvent> direct_events;
  direct.on_event = [&](const BnbEvent& e) { direct_events.push_back(e); };
  BnbResult ref = solve_design_bnb(inst, direct);

  CHECK(out.result.objective == ref.objective);
  CHECK(out.result.lower_bound == ref.lower_bound);
  CHECK(out.result.design == ref.design);
  CHECK(out.result.nodes == ref.nodes);
  CHECK(out.result.total_lmo_calls == ref.total_lmo_calls);
  CHECK(out.result.solved);

  REQUIRE(out.events.size() == direct_events.size());
  for (std::size_t i = 0; i < out.events.size(); ++i) {
    CHECK(out.events[i].event == direct_events[i].event);
    CHECK(out.events[i].value == direct_events[i].value);
  }
}

TEST_CASE("result records serialize canonically and deterministically") {
  NetworkInstance inst = small_design_instance(0xca11ab1eu, 2);

  RunConfig cfg;
  cfg.instance_path = "demo/instance.json";
  cfg.mode = SolveMode::ifw;
  cfg.gap_target = 0.02;
  cfg.seed = 41;
  RunOutcome out = run_solve(inst, cfg);
  REQUIRE(out.result.solved);

  nlohmann::ordered_json j = result_to_json(cfg, out.result);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{
                    "format", "version", "instance", "mode", "seed",
                    "gap_target", "violation_target", "time_limit_s", "solved",
                    "objective", "lower_bound", "gap", "violation", "nodes",
                    "lmo_calls", "bpcg_iterations", "design"});
  CHECK(j["format"] == kResultFormatName);
  CHECK(j["version"] == kResultFormatVersion);
  CHECK(j["instance"] == "demo/instance.json");
  CHECK(j["mode"] == "ifw");
  CHECK(j["seed"] == 41);
  CHECK(j["objective"].get<double>() == out.result.objective);
  CHECK(j["nodes"].get<long>() == out.result.nodes);
  REQUIRE(j["design"].size() == out.result.design.size());
  for (std::size_t e = 0; e < out.result.design.size(); ++e) {
    int bit = j["design"][e].get<int>();
    CHECK((bit == 0 || bit == 1));
    CHECK(bit == (out.result.design[e] >= 0.5 ? 1 : 0));
  }

  std::string text = write_result(cfg, out.result);
  CHECK(text == j.dump(2) + "\n");

  // An identical run renders to identical bytes; wall time never leaks in.
  RunOutcome again = run_solve(inst, cfg);
  CHECK(write_result(cfg, again.result) == text);
  CHECK(text.find("wall") == std::string::npos);
}

TEST_CASE("non-finite result fields serialize as null") {
  BnbResult res;  // defaults: objective inf, lower bound -inf, gap inf
  RunConfig cfg;
  cfg.instance_path = "x.json";
  nlohmann::ordered_json j = result_to_json(cfg, res);
  CHECK(j["objective"].is_null());
  CHECK(j["lower_bound"].is_null());
  CHECK(j["gap"].is_null());
  CHECK(j["violation"].is_null());
  CHECK(j["solved"] == false);
  CHECK(j["design"].empty());
}

TEST_CASE("event CSV round-trips exactly") {
  std::vector<BnbEvent> events = {
      {0.0, "incumbent", 99827.52274955089},
      {1.25e-4, "node_open", -kInf},
      {3.5e-3, "lower_bound", 0.1 + 0.2},
      {0.75, "upper_bound", 92014.273698018},
  };
  std::string csv = events_to_csv(events);
  CHECK(csv.rfind("time_s,event,value\n", 0) == 0);

  std::vector<BnbEvent> parsed = events_from_csv(csv);
  REQUIRE(parsed.size() == events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(parsed[i].time_s == events[i].time_s);
    CHECK(parsed[i].event == events[i].event);
    CHECK(parsed[i].value == events[i].value);
  }
  CHECK(events_to_csv(parsed) == csv);

  CHECK(events_from_csv("time_s,event,value\n").empty());
}

TEST_CASE("event CSV rejects malformed input") {
  CHECK_THROWS_AS(events_from_csv(""), ParseError);
  CHECK_THROWS_AS(events_from_csv("time,event,value\n0,x,1\n"), ParseError);
  try {
    events_from_csv("time_s,event,value\n0.5,node_open\n");
    FAIL("missing field accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(events_from_csv("time_s,event,value\nabc,node_open,1\n"),
                  ParseError);
  CHECK_THROWS_AS(events_from_csv("time_s,event,value\n0.5,node_open,12x\n"),
                  ParseError);
}

TEST_CASE("benchmark matrices parse with defaults and overrides") {
  nlohmann::json j = nlohmann::json::parse(R"({
    "defaults": {"mode": "penalty", "gap": 0.1, "time_limit_s": 30},
    "runs": [
      {"instance": "a.json"},
      {"instance": "b.json", "mode": "ifw", "violation": 0.5}
    ]
  })");
  std::vector<BenchmarkRun> runs = benchmark_matrix_from_json(j);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].instance == "a.json");
  CHECK(runs[0].mode == SolveMode::penalty);
  CHECK(runs[0].gap_target == 0.1);
  CHECK(runs[0].time_limit_s == 30.0);
  CHECK(runs[0].violation_target == 0.01);
  CHECK(runs[1].mode == SolveMode::ifw);
  CHECK(runs[1].violation_target == 0.5);
  CHECK(runs[1].gap_target == 0.1);

  CHECK_THROWS_AS(
      benchmark_matrix_from_json(nlohmann::json::parse(R"({"runs": []})")),
      std::invalid_argument);
  CHECK_THROWS_AS(benchmark_matrix_from_json(nlohmann::json::object()),
                  ParseError);
  CHECK_THROWS_AS(benchmark_matrix_from_json(nlohmann::json::parse("[1]")),
                  ParseError);
  CHECK_THROWS_AS(
      benchmark_matrix_from_json(nlohmann::json::parse(R"({"runs": [{}]})")),
      ParseError);
  CHECK_THROWS_AS(benchmark_matrix_from_json(nlohmann::json::parse(
                      R"({"runs": [{"instance": "a", "fraction": 0.1}]})")),
                  ParseError);
  CHECK_THROWS_AS(benchmark_matrix_from_json(nlohmann::json::parse(
                      R"({"runs": [{"instance": "a", "mode": "bogus"}]})")),
                  ParseError);
  CHECK_THROWS_AS(benchmark_matrix_from_json(nlohmann::json::parse(
                      R"({"runs": [{"instance": "a", "gap": "high"}]})")),
                  ParseError);
}

TEST_CASE("benchmark row CSV round-trips, quoting included") {
  std::vector<BenchmarkRow> rows(3);
  rows[0] = {"plain.json", "ifw", 1, true, 0.125, 42.5, 0.01, ""};
  rows[1] = {"with,comma.json", "penalty", 10, false, 2.5, kInf, kInf, ""};
  rows[2] = {"broken.json", "benders", 0, false, 0.001,
             std::nan(""), std::nan(""), "cannot open \"broken.json\", sorry"};

  std::string csv = benchmark_rows_to_csv(rows);
  CHECK(csv.find("\"with,comma.json\"") != std::string::npos);
  CHECK(csv.find("\"cannot open \"\"broken.json\"\", sorry\"") !=
        std::string::npos);

  std::vector<BenchmarkRow> parsed = benchmark_rows_from_csv(csv);
  REQUIRE(parsed.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(parsed[i].instance == rows[i].instance);
    CHECK(parsed[i].mode == rows[i].mode);
    CHECK(parsed[i].scenarios == rows[i].scenarios);
    CHECK(parsed[i].solved == rows[i].solved);
    CHECK(parsed[i].time_s == rows[i].time_s);
    if (std::isnan(rows[i].objective)) {
      CHECK(std::isnan(parsed[i].objective));
    } else {
      CHECK(parsed[i].objective == rows[i].objective);
    }
    CHECK(parsed[i].error == rows[i].error);
  }
  CHECK(benchmark_rows_to_csv(parsed) == csv);

  // Re-parsing and re-aggregating reproduces the cumulative table.
  std::vector<CumulativePoint> before = cumulative_solved(rows);
  std::vector<CumulativePoint> after = cumulative_solved(parsed);
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i].mode == after[i].mode);
    CHECK(before[i].time_s == after[i].time_s);
    CHECK(before[i].solved == after[i].solved);
  }

  CHECK_THROWS_AS(benchmark_rows_from_csv(""), ParseError);
  CHECK_THROWS_AS(benchmark_rows_from_csv("bogus\n"), ParseError);
  std::string header =
      "instance,mode,scenarios,solved,time_s,objective,gap,error\n";
  CHECK(benchmark_rows_from_csv(header).empty());
  CHECK_THROWS_AS(benchmark_rows_from_csv(header + "a,ifw,1,2,0,0,0,\n"),
                  ParseError);
  CHECK_THROWS_AS(benchmark_rows_from_csv(header + "a,ifw,1,1,0,0\n"),
                  ParseError);
  CHECK_THROWS_AS(benchmark_rows_from_csv(header + "a,ifw,one,1,0,0,0,\n"),
                  ParseError);
  CHECK_THROWS_AS(benchmark_rows_from_csv(header + "\"a,ifw,1,1,0,0,0,\n"),
                  ParseError);
}

TEST_CASE("cumulative curves count solved runs per mode") {
  std::vector<BenchmarkRow> rows(5);
  rows[0] = {"a", "ifw", 1, true, 3.0, 1.0, 0.0, ""};
  rows[1] = {"b", "ifw", 1, true, 1.0, 1.0, 0.0, ""};
  rows[2] = {"c", "penalty", 1, true, 2.0, 1.0, 0.0, ""};
  rows[3] = {"d", "ifw", 1, false, 0.5, 1.0, 0.2, ""};
  rows[4] = {"e", "penalty", 1, false, 0.1, std::nan(""), std::nan(""), "x"};

  std::vector<CumulativePoint> points = cumulative_solved(rows);
  REQUIRE(points.size() == 3);
  CHECK(points[0].mode == "ifw");
  CHECK(points[0].time_s == 1.0);
  CHECK(points[0].solved == 1);
  CHECK(points[1].mode == "ifw");
  CHECK(points[1].time_s == 3.0);
  CHECK(points[1].solved == 2);
  CHECK(points[2].mode == "penalty");
  CHECK(points[2].time_s == 2.0);
  CHECK(points[2].solved == 1);

  // A single solved run makes a unit step at its solve time.
  std::vector<BenchmarkRow> one = {rows[2]};
  std::vector<CumulativePoint> step = cumulative_solved(one);
  REQUIRE(step.size() == 1);
  CHECK(step[0].mode == "penalty");
  CHECK(step[0].time_s == 2.0);
  CHECK(step[0].solved == 1);

  CHECK(cumulative_to_csv(step) == "mode,time_s,solved\npenalty,2,1\n");
  CHECK(cumulative_solved(std::vector<BenchmarkRow>{}).empty());
}

TEST_CASE("benchmark sweeps keep matrix order and record failures") {
  TempDir tmp("netdesign_test_run_sweep");
  std::string path_a = tmp.file("a.json");
  std::string path_b = tmp.file("b.json");
  save_instance_file(small_design_instance(0xaau), path_a);
  save_instance_file(small_design_instance(0xbbu, 2), path_b);

  std::vector<BenchmarkRun> runs(3);
  runs[0] = {path_b, SolveMode::benders, 0.05, 0.01, 60.0};
  runs[1] = {tmp.file("missing.json"), SolveMode::ifw, 0.05, 0.01, 60.0};
  runs[2] = {path_a, SolveMode::penalty, 0.05, 0.01, 60.0};

  std::vector<BenchmarkRow> rows = run_benchmark(runs, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].instance == path_b);
  CHECK(rows[0].mode == "benders");
  CHECK(rows[0].scenarios == 2);
  CHECK(rows[0].solved);
  CHECK(rows[0].error.empty());
  CHECK(rows[1].error != "");
  CHECK_FALSE(rows[1].solved);
  CHECK(std::isnan(rows[1].objective));
  CHECK(rows[2].instance == path_a);
  CHECK(rows[2].scenarios == 1);

  // Thread count changes scheduling, never contents (times aside).
  std::vector<BenchmarkRow> serial = run_benchmark(runs, 1);
  REQUIRE(serial.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(serial[i].instance == rows[i].instance);
    CHECK(serial[i].solved == rows[i].solved);
    CHECK(serial[i].error == rows[i].error);
    if (rows[i].error.empty()) {
      CHECK(serial[i].objective == rows[i].objective);
      CHECK(serial[i].gap == rows[i].gap);
    }
  }

  CHECK_THROWS_AS(run_benchmark({}, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_benchmark(runs, 0), std::invalid_argument);
}

TEST_CASE("matrix files load through the JSON reader") {
  TempDir tmp("netdesign_test_run_matrix");
  std::string path = tmp.file("m.json");
  {
    std::ofstream out(path, std::ios::binary);
    out << R"({"runs": [{"instance": "i.json", "mode": "benders"}]})";
  }
  std::vector<BenchmarkRun> runs = load_benchmark_matrix(path);
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].mode == SolveMode::benders);

  {
    std::ofstream out(path, std::ios::binary);
    out << "{not json";
  }
  CHECK_THROWS_AS(load_benchmark_matrix(path), ParseError);
  CHECK_THROWS_AS(load_benchmark_matrix(tmp.file("absent.json")), ParseError);
}
