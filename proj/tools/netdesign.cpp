// Command-line driver: instance generation from TNTP data, single solver
// runs, and benchmark matrices. Exit codes: 0 solved / success, 2 finished
// but unsolved within its limits, 1 error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "netdesign/benchmark.hpp"
#include "netdesign/errors.hpp"
#include "netdesign/instance_build.hpp"
#include "netdesign/instance_json.hpp"
#include "netdesign/run.hpp"
#include "netdesign/tntp.hpp"

namespace {

using namespace netdesign;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

int cmd_generate(const std::string& net_path, const std::string& trips_path,
                 const InstanceSpec& spec, const std::string& out_path) {
  RawTntpNetwork net = load_network_file(net_path);
  RawTripTable trips = load_trips_file(trips_path);
  NetworkInstance inst = build_instance(net, trips, spec);
  save_instance_file(inst, out_path);
  std::cout << "nodes:        " << inst.node_count << "\n"
            << "edges:        " << inst.edge_count() << "\n"
            << "removable:    " << inst.removable_count() << "\n"
            << "zones:        " << inst.zone_count() << "\n"
            << "total demand: " << format_number(trips.demand_sum()) << "\n"
            << "arc price:    " << format_number(inst.prices.front()) << "\n"
            << "wrote " << out_path << "\n";
  return 0;
}

int cmd_solve(const RunConfig& cfg) {
  NetworkInstance inst = load_instance_file(cfg.instance_path);
  RunOutcome out = run_solve(inst, cfg);
  const BnbResult& res = out.result;

  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  std::string result_path = (dir / "result.json").string();
  std::string events_path = (dir / "events.csv").string();
  write_text_file(result_path, write_result(cfg, res));
  write_text_file(events_path, events_to_csv(out.events));

  std::cout << "instance:    " << cfg.instance_path << " ("
            << inst.edge_count() << " edges, " << inst.removable_count()
            << " removable, " << inst.scenario_count() << " scenario"
            << (inst.scenario_count() == 1 ? "" : "s") << ")\n"
            << "mode:        " << to_string(cfg.mode) << "\n"
            << "objective:   " << format_number(res.objective) << "\n"
            << "lower bound: " << format_number(res.lower_bound) << "\n"
            << "gap:         " << format_number(res.gap) << "\n"
            << "violation:   " << format_number(res.violation) << "\n"
            << "nodes:       " << res.nodes << ", lmo calls: "
            << res.total_lmo_calls << ", wall time: "
            << format_number(res.wall_time_s) << " s\n"
            << "status:      "
            << (res.solved ? "solved"
                           : "unsolved (gap target " +
                                 format_number(cfg.gap_target) + ")")
            << "\n"
            << "wrote " << result_path << ", " << events_path << "\n";
  return res.solved ? 0 : 2;
}

int cmd_benchmark(const std::string& matrix_path, int threads,
                  const std::string& out_dir) {
  std::vector<BenchmarkRun> runs = load_benchmark_matrix(matrix_path);
  std::vector<BenchmarkRow> rows = run_benchmark(runs, threads);

  long solved = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BenchmarkRow& row = rows[i];
    std::cout << "[" << i + 1 << "/" << rows.size() << "] " << row.instance
              << " mode=" << row.mode << " S=" << row.scenarios << ": ";
    if (!row.error.empty()) {
      std::cout << "failed: " << row.error << "\n";
    } else if (row.solved) {
      ++solved;
      std::cout << "solved in " << format_number(row.time_s)
                << " s, objective " << format_number(row.objective) << "\n";
    } else {
      std::cout << "unsolved (gap " << format_number(row.gap) << " after "
                << format_number(row.time_s) << " s)\n";
    }
  }

  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  std::string rows_path = (dir / "benchmark_runs.csv").string();
  std::string curve_path = (dir / "benchmark_cumulative.csv").string();
  write_text_file(rows_path, benchmark_rows_to_csv(rows));
  std::vector<CumulativePoint> curve = cumulative_solved(rows);
  write_text_file(curve_path, cumulative_to_csv(curve));
  std::cout << "solved " << solved << "/" << rows.size() << " runs\n"
            << "wrote " << rows_path << ", " << curve_path << "\n";
  return 0;
}

// Fills solve settings from a JSON config file; flags given on the command
// line keep their values.
void apply_solve_config(const std::string& path, const CLI::App* solve,
                        RunConfig& cfg, std::string& mode_name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config file: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "instance") {
        if (!solve->count("--instance"))
          cfg.instance_path = value.get<std::string>();
      } else if (key == "mode") {
        if (!solve->count("--mode")) mode_name = value.get<std::string>();
      } else if (key == "gap") {
        if (!solve->count("--gap")) cfg.gap_target = value.get<double>();
      } else if (key == "violation") {
        if (!solve->count("--violation"))
          cfg.violation_target = value.get<double>();
      } else if (key == "time_limit_s") {
        if (!solve->count("--time-limit"))
          cfg.time_limit_s = value.get<double>();
      } else if (key == "seed") {
        if (!solve->count("--seed")) cfg.seed = value.get<std::uint64_t>();
      } else if (key == "output_dir") {
        if (!solve->count("--output-dir"))
          cfg.output_dir = value.get<std::string>();
      } else if (key == "threads") {
        cfg.threads = value.get<int>();
      } else {
        throw ParseError("unknown config key \"" + key + "\"");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("bad value for config key \"" + key + "\": " + e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"network design over congestion-aware traffic assignment"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand(
      "generate", "build a design instance from TNTP network + trips files");
  std::string net_path, trips_path, gen_out;
  InstanceSpec spec;
  gen->add_option("--net", net_path, "network file (*_net.tntp)")->required();
  gen->add_option("--trips", trips_path, "trip table (*_trips.tntp)")
      ->required();
  gen->add_option("--fraction", spec.removal_fraction,
                  "fraction of arcs made removable")
      ->capture_default_str();
  gen->add_option("--scenarios", spec.scenario_count,
                  "demand scenarios to sample (0 = deterministic)")
      ->capture_default_str();
  gen->add_option("--scenario-low", spec.scenario_low,
                  "lower demand scaling factor")
      ->capture_default_str();
  gen->add_option("--scenario-high", spec.scenario_high,
                  "upper demand scaling factor")
      ->capture_default_str();
  gen->add_option("--seed", spec.seed, "seed for arc and scenario draws")
      ->capture_default_str();
  gen->add_option("--toll-factor", spec.toll_factor,
                  "toll weight in the constant edge cost")
      ->capture_default_str();
  gen->add_option("--distance-factor", spec.distance_factor,
                  "length weight in the constant edge cost")
      ->capture_default_str();
  gen->add_option("-o,--output", gen_out, "instance JSON destination")
      ->required();

  auto* solve =
      app.add_subcommand("solve", "branch-and-bound on an instance file");
  RunConfig run;
  std::string mode_name = "ifw";
  std::string config_path;
  solve->add_option("--instance", run.instance_path, "instance JSON file");
  solve->add_option("--mode", mode_name, "node oracle: ifw, penalty, benders")
      ->capture_default_str();
  solve->add_option("--gap", run.gap_target,
                    "relative duality gap declaring success")
      ->capture_default_str();
  solve->add_option("--violation", run.violation_target,
                    "incumbent coupling-violation ceiling")
      ->capture_default_str();
  solve->add_option("--time-limit", run.time_limit_s,
                    "wall-clock budget in seconds")
      ->capture_default_str();
  solve->add_option("--seed", run.seed, "seed recorded in the result")
      ->capture_default_str();
  solve->add_option("-o,--output-dir", run.output_dir,
                    "directory for result.json and events.csv")
      ->capture_default_str();
  solve->add_option("--config", config_path,
                    "JSON config file; explicit flags win");

  auto* bench = app.add_subcommand(
      "benchmark", "run a matrix of solves and tabulate solved-versus-time");
  std::string matrix_path;
  std::string bench_out = ".";
  int threads = 1;
  bench->add_option("--matrix", matrix_path,
                    "matrix JSON: {defaults: {...}, runs: [...]}")
      ->required();
  bench->add_option("--threads", threads, "solves run concurrently")
      ->capture_default_str();
  bench->add_option("-o,--output-dir", bench_out,
                    "directory for the CSV tables")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      return cmd_generate(net_path, trips_path, spec, gen_out);
    }
    if (solve->parsed()) {
      if (!config_path.empty()) {
        apply_solve_config(config_path, solve, run, mode_name);
      }
      run.mode = parse_solve_mode(mode_name);
      if (run.instance_path.empty()) {
        throw std::invalid_argument(
            "no instance given (--instance or \"instance\" in --config)");
      }
      return cmd_solve(run);
    }
    return cmd_benchmark(matrix_path, threads, bench_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
