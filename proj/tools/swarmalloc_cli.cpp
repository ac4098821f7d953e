// Command line front end: greedy allocation, exhaustive cross-checks,
// allocation sweeps, curve tables, swarm simulation and retrograde fits.
//
// Exit codes: 0 success, 1 greedy/exhaustive mismatch, 2 malformed input or
// usage, 3 precondition violation, 4 resource cap exceeded.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <swarmalloc/allocator.hpp>
#include <swarmalloc/curves.hpp>
#include <swarmalloc/io.hpp>
#include <swarmalloc/rng.hpp>
#include <swarmalloc/sim.hpp>
#include <swarmalloc/usl_fit.hpp>

namespace {

using swarmalloc::io::SchemaError;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Results are fully computed before anything is written, so a failing command
// never leaves a truncated file behind.
void emit(const std::string& payload, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(output_path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot open output file: " + output_path);
  out << payload;
}

swarmalloc::TaskSet load_taskset(const std::string& path) {
  return swarmalloc::io::parse_taskset(nlohmann::json::parse(read_file(path)));
}

void require_format(const std::string& format, const std::string& expected) {
  if (format != expected)
    throw SchemaError("unsupported format for this command: " + format);
}

struct SimulateArgs {
  std::string config_path, geometry, controller, output, dump_env;
  double f = 0.0;
  std::vector<int> n_list;
  int n = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::int64_t max_timesteps = 0;
  bool interference = false;
};

int run_simulate(const CLI::App& cmd, const SimulateArgs& args) {
  swarmalloc::io::SimConfig cfg;
  bool has_n = false;
  if (!args.config_path.empty()) {
    cfg = swarmalloc::io::parse_sim_config(
        nlohmann::json::parse(read_file(args.config_path)));
    has_n = true;
  }
  if (cmd.count("--geometry")) cfg.geometry = swarmalloc::io::parse_geometry(args.geometry);
  if (cmd.count("--controller"))
    cfg.controller = swarmalloc::io::parse_controller(args.controller);
  if (cmd.count("--f")) cfg.f = args.f;
  if (cmd.count("--n")) {
    cfg.n_list = {args.n};
    has_n = true;
  }
  if (cmd.count("--n-list")) {
    cfg.n_list = args.n_list;
    has_n = true;
  }
  if (cmd.count("--reps")) cfg.repetitions = args.reps;
  if (cmd.count("--interference")) cfg.interference = true;
  if (cmd.count("--seed")) {
    cfg.master_seed = args.seed;
    cfg.has_seed = true;
  }
  if (cmd.count("--max-timesteps")) cfg.max_timesteps = args.max_timesteps;

  if (!has_n || cfg.n_list.empty())
    throw SchemaError("simulate needs a swarm size (--n, --n-list or config)");
  if (!cfg.has_seed)
    throw SchemaError("simulate needs an explicit seed (--seed or master_seed)");
  if (cfg.repetitions < 1) throw std::domain_error("repetitions must be >= 1");

  std::string csv = swarmalloc::io::sim_csv_header();
  std::string env_dump;
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    const int n = cfg.n_list[i];
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      swarmalloc::sim::SimRun run;
      run.geometry = cfg.geometry;
      run.f = cfg.f;
      run.controller = cfg.controller;
      run.n = n;
      run.interference = cfg.interference;
      run.rng_seed = swarmalloc::derive_seed(cfg.master_seed, std::uint64_t(n),
                                             std::uint64_t(rep));
      run.max_timesteps = cfg.max_timesteps;
      run.motion = cfg.motion;
      run = swarmalloc::sim::run_experiment(std::move(run));
      csv += swarmalloc::io::sim_csv_row(run, rep);
      if (i == 0 && rep == 0 && !args.dump_env.empty()) {
        // Reproduce the environment exactly as the first run drew it.
        swarmalloc::Rng rng(run.rng_seed);
        env_dump = swarmalloc::sim::generate_environment(cfg.geometry, cfg.f,
                                                         rng.next_u64())
                       .to_bitmap();
      }
    }
  }
  if (!args.dump_env.empty()) emit(env_dump, args.dump_env);
  emit(csv, args.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"marginal-gain allocation over scalability curves, with a swarm "
               "simulator and retrograde curve fitting"};
  app.require_subcommand(1);

  // allocate
  auto* cmd_allocate = app.add_subcommand("allocate", "Greedy allocation for one N");
  std::string al_taskset, al_output, al_format = "json";
  std::int64_t al_n = 0;
  double al_epsilon = 0.0;
  cmd_allocate->add_option("--taskset", al_taskset, "Task set JSON file")->required();
  cmd_allocate->add_option("--N", al_n, "Total number of agents")->required();
  cmd_allocate->add_option("--epsilon", al_epsilon, "Override the gain cutoff");
  cmd_allocate->add_option("--output", al_output, "Write result here instead of stdout");
  cmd_allocate->add_option("--format", al_format, "Output format (json)");

  // sweep
  auto* cmd_sweep = app.add_subcommand("sweep", "Greedy allocation over a range of N");
  std::string sw_taskset, sw_output, sw_format = "csv";
  std::int64_t sw_min = 0, sw_max = 0, sw_step = 1;
  cmd_sweep->add_option("--taskset", sw_taskset, "Task set JSON file")->required();
  cmd_sweep->add_option("--n-min", sw_min, "First N")->required();
  cmd_sweep->add_option("--n-max", sw_max, "Last N")->required();
  cmd_sweep->add_option("--step", sw_step, "N increment");
  cmd_sweep->add_option("--output", sw_output, "Write result here instead of stdout");
  cmd_sweep->add_option("--format", sw_format, "Output format (csv)");

  // oracle
  auto* cmd_oracle = app.add_subcommand(
      "oracle", "Compare the greedy result against exhaustive search");
  std::string or_taskset, or_output;
  std::int64_t or_n = 0, or_cap = 10000000;
  cmd_oracle->add_option("--taskset", or_taskset, "Task set JSON file")->required();
  cmd_oracle->add_option("--N", or_n, "Total number of agents")->required();
  cmd_oracle->add_option("--cap", or_cap, "Enumeration cap");
  cmd_oracle->add_option("--output", or_output, "Write result here instead of stdout");

  // curves
  auto* cmd_curves = app.add_subcommand("curves", "Tabulate C(n) per task");
  std::string cu_taskset, cu_output, cu_format = "csv";
  std::int64_t cu_max = 0;
  cmd_curves->add_option("--taskset", cu_taskset, "Task set JSON file")->required();
  cmd_curves->add_option("--n-max", cu_max, "Largest group size")->required();
  cmd_curves->add_option("--output", cu_output, "Write result here instead of stdout");
  cmd_curves->add_option("--format", cu_format, "Output format (csv)");

  // simulate
  auto* cmd_simulate = app.add_subcommand("simulate", "Collective perception runs");
  SimulateArgs sim_args;
  cmd_simulate->add_option("--config", sim_args.config_path, "Run config JSON file");
  cmd_simulate->add_option("--geometry", sim_args.geometry,
                           "checkerboard|striped|four_rectangles|halved");
  cmd_simulate->add_option("--f", sim_args.f, "White fill ratio in (0.5, 1)");
  cmd_simulate->add_option("--controller", sim_args.controller,
                           "centralized|decentralized|iterative");
  cmd_simulate->add_option("--n", sim_args.n, "Swarm size");
  cmd_simulate->add_option("--n-list", sim_args.n_list, "Swarm sizes")
      ->delimiter(',');
  cmd_simulate->add_option("--reps", sim_args.reps, "Repetitions per swarm size");
  cmd_simulate->add_flag("--interference", sim_args.interference,
                         "Robots sense and block each other");
  cmd_simulate->add_option("--seed", sim_args.seed, "Master seed (required)");
  cmd_simulate->add_option("--max-timesteps", sim_args.max_timesteps,
                           "Give up after this many steps");
  cmd_simulate->add_option("--dump-env", sim_args.dump_env,
                           "Also write the first run's arena bitmap here");
  cmd_simulate->add_option("--output", sim_args.output,
                           "Write result here instead of stdout");

  // estimate-p
  auto* cmd_estimate = app.add_subcommand(
      "estimate-p", "Estimate single-robot accuracy from centralized runs");
  std::string es_geometry, es_output;
  double es_f = 0.0;
  int es_n = 20, es_reps = 0;
  std::uint64_t es_seed = 0;
  bool es_interference = false;
  cmd_estimate->add_option("--geometry", es_geometry,
                           "checkerboard|striped|four_rectangles|halved")
      ->required();
  cmd_estimate->add_option("--f", es_f, "White fill ratio in (0.5, 1)")->required();
  cmd_estimate->add_option("--n", es_n, "Robots per run");
  cmd_estimate->add_option("--reps", es_reps, "Repetitions")->required();
  cmd_estimate->add_option("--seed", es_seed, "Master seed")->required();
  cmd_estimate->add_flag("--interference", es_interference,
                         "Robots sense and block each other");
  cmd_estimate->add_option("--output", es_output,
                           "Write result here instead of stdout");

  // fit
  auto* cmd_fit = app.add_subcommand("fit", "Fit a retrograde curve to n,y data");
  std::string fi_input, fi_output;
  cmd_fit->add_option("--input", fi_input, "CSV file with n,performance rows")
      ->required();
  cmd_fit->add_option("--output", fi_output, "Write result here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cmd_allocate) {
      require_format(al_format, "json");
      swarmalloc::TaskSet ts = load_taskset(al_taskset);
      if (cmd_allocate->count("--epsilon")) ts.epsilon = al_epsilon;
      const auto alloc = swarmalloc::allocate(al_n, ts);
      emit(swarmalloc::io::allocation_to_json(alloc).dump(2) + "\n", al_output);
      return 0;
    }
    if (*cmd_sweep) {
      require_format(sw_format, "csv");
      const auto rows = swarmalloc::sweep(load_taskset(sw_taskset), sw_min, sw_max,
                                          sw_step);
      emit(swarmalloc::io::sweep_to_csv(rows), sw_output);
      return 0;
    }
    if (*cmd_oracle) {
      const swarmalloc::TaskSet ts = load_taskset(or_taskset);
      const auto greedy = swarmalloc::allocate(or_n, ts);
      const auto exhaustive = swarmalloc::brute_force(or_n, ts, or_cap);
      const double gap = std::fabs(greedy.collective_performance -
                                   exhaustive.best.collective_performance);
      const bool match =
          gap <= 1e-12 * std::fabs(exhaustive.best.collective_performance);
      nlohmann::json j;
      j["match"] = match;
      j["tie_set_size"] = exhaustive.tie_set.size();
      j["greedy"] = swarmalloc::io::allocation_to_json(greedy);
      j["oracle_best"] = swarmalloc::io::allocation_to_json(exhaustive.best);
      j["tie_set"] = exhaustive.tie_set;
      emit(j.dump(2) + "\n", or_output);
      return match ? 0 : 1;
    }
    if (*cmd_curves) {
      require_format(cu_format, "csv");
      emit(swarmalloc::io::curves_to_csv(load_taskset(cu_taskset), cu_max), cu_output);
      return 0;
    }
    if (*cmd_simulate) return run_simulate(*cmd_simulate, sim_args);
    if (*cmd_estimate) {
      const auto est = swarmalloc::sim::estimate_individual_accuracy(
          swarmalloc::io::parse_geometry(es_geometry), es_f, es_n, es_reps, es_seed,
          swarmalloc::sim::MotionParams{}, es_interference);
      nlohmann::json j;
      j["geometry"] = es_geometry;
      j["f"] = es_f;
      j["n"] = es_n;
      j["repetitions"] = es_reps;
      j["p"] = est.p;
      j["std_error"] = est.std_error;
      j["correct"] = est.correct;
      j["total"] = est.total;
      emit(j.dump(2) + "\n", es_output);
      return 0;
    }
    if (*cmd_fit) {
      std::istringstream in(read_file(fi_input));
      const auto pts = swarmalloc::io::parse_fit_csv(in);
      const auto fit = swarmalloc::fit_usl(pts);
      emit(swarmalloc::io::fit_to_json(fit).dump(2) + "\n", fi_output);
      return 0;
    }
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const swarmalloc::CapExceededError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
