// Command-line front end: energy minimization, full experiments, state
// diagnostics, theorem-verification suites, and grid sweeps.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 verification
// suite failed.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hug/energy.hpp"
#include "hug/gnc.hpp"
#include "hug/optim.hpp"
#include "hug/rng.hpp"
#include "hug/runner.hpp"
#include "hug/serialize.hpp"
#include "hug/verify.hpp"
#include "hug/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hug::Error("cannot open '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hug::Error("cannot open '" + path + "' for writing");
  out << contents;
}

struct OptimizeArgs {
  int n = 3;
  int d = 2;
  double s = 2.0;
  int restarts = 8;
  int iters = 40000;
  double step = 0.1;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_optimize(const OptimizeArgs& args) {
  hug::OptimConfig cfg;
  cfg.step_size = args.step;
  cfg.momentum = 0.9;
  cfg.max_iters = args.iters;
  cfg.grad_tol = 1e-11;
  cfg.schedule = hug::StepSchedule::StepDecay;
  cfg.restarts = args.restarts;
  cfg.seed = args.seed;

  const hug::EnergyMinimum result = hug::minimize_energy(args.n, args.d, args.s, cfg);
  const double pairs = static_cast<double>(args.n) * (args.n - 1);
  std::printf("n=%d d=%d s=%g\n", args.n, args.d, args.s);
  std::printf("energy %.12g\n", result.energy);
  std::printf("average_energy %.12g\n", result.energy / pairs);
  std::printf("separation %.12g\n", hug::separation(result.config).value);
  std::printf("best_restart %d\n", result.restart_index);
  if (!args.out.empty()) {
    write_file(args.out, hug::to_json(result.config, 2) + "\n");
    std::printf("wrote %s\n", args.out.c_str());
  }
  return 0;
}

int cmd_train(const std::string& config_path) {
  const hug::ExperimentConfig cfg =
      hug::experiment_config_from_json(read_file(config_path));
  const hug::ExperimentResult result = hug::experiment(cfg);
  std::printf("iterations %d\n",
              result.trajectory.points.empty()
                  ? 0
                  : result.trajectory.points.back().iteration);
  std::printf("final_loss %.12g\n",
              result.trajectory.points.empty()
                  ? 0.0
                  : result.trajectory.points.back().loss);
  std::cout << hug::to_json(result.report, 2) << "\n";
  return 0;
}

int cmd_diagnose(const std::string& state_path, const std::string& out) {
  const hug::LabeledState state = hug::load_state(state_path);
  if (!state.on_sphere) {
    throw hug::Error("diagnose requires a hypersphere-normalized state");
  }
  const hug::GncReport report = hug::gnc_report(
      state.features_config(), state.labels, state.proxies_config());
  const std::string text = hug::to_json(report, 2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  return 0;
}

int cmd_verify(const std::string& suite_name, const std::string& out) {
  std::vector<hug::VerifySuite> suites;
  if (suite_name == "all") {
    suites = hug::all_verify_suites();
  } else {
    suites.push_back(hug::verify_suite_from_name(suite_name));
  }
  bool all_pass = true;
  json reports = json::array();
  for (hug::VerifySuite suite : suites) {
    const hug::SuiteReport report = hug::verify(suite);
    all_pass = all_pass && report.all_pass;
    for (const hug::CheckResult& check : report.checks) {
      std::printf("[%s] %s/%s measured=%.8g target=%.8g tol=%.3g\n",
                  check.pass ? "PASS" : "FAIL", report.suite.c_str(),
                  check.name.c_str(), check.measured, check.target,
                  check.tolerance);
    }
    std::printf("[%s] suite %s\n", report.all_pass ? "PASS" : "FAIL",
                report.suite.c_str());
    reports.push_back(json::parse(hug::to_json(report)));
  }
  if (!out.empty()) {
    write_file(out, reports.dump(2) + "\n");
  }
  return all_pass ? 0 : 3;
}

// One grid axis: a config field name plus the values it sweeps over.
struct SweepAxis {
  std::string key;
  std::vector<json> values;
};

void apply_axis(hug::ExperimentConfig& cfg, const std::string& key, const json& value) {
  if (key == "C") {
    cfg.C = value.get<int>();
  } else if (key == "d") {
    cfg.d = value.get<int>();
  } else if (key == "samples_per_class") {
    cfg.samples_per_class = value.get<int>();
  } else if (key == "imbalance_ratio") {
    cfg.imbalance_ratio = value.get<double>();
  } else if (key == "seed") {
    cfg.optim.seed = value.get<std::uint64_t>();
  } else if (key == "alpha") {
    cfg.loss.alpha = value.get<double>();
  } else if (key == "beta") {
    cfg.loss.beta = value.get<double>();
  } else if (key == "step_size") {
    cfg.optim.step_size = value.get<double>();
  } else {
    throw hug::ParseError("unknown sweep axis '" + key + "'");
  }
}

int cmd_sweep(const std::string& config_path, int threads) {
  const json j = json::parse(read_file(config_path), nullptr, false);
  if (j.is_discarded()) throw hug::ParseError("sweep config: malformed JSON");
  if (!j.contains("base") || !j.contains("grid") || !j.contains("out_dir")) {
    throw hug::ParseError("sweep config requires base, grid, out_dir");
  }
  const hug::ExperimentConfig base =
      hug::experiment_config_from_json(j["base"].dump());
  const std::string out_dir = j["out_dir"].get<std::string>();

  std::vector<SweepAxis> axes;
  for (const auto& [key, values] : j["grid"].items()) {
    if (!values.is_array() || values.empty()) {
      throw hug::ParseError("sweep axis '" + key + "' must be a non-empty array");
    }
    axes.push_back(SweepAxis{key, std::vector<json>(values.begin(), values.end())});
  }

  std::size_t total = 1;
  for (const SweepAxis& axis : axes) total *= axis.values.size();
  fs::create_directories(out_dir);

  std::vector<hug::ExperimentConfig> cells(total, base);
  for (std::size_t cell = 0; cell < total; ++cell) {
    std::size_t rest = cell;
    for (const SweepAxis& axis : axes) {
      apply_axis(cells[cell], axis.key, axis.values[rest % axis.values.size()]);
      rest /= axis.values.size();
    }
    const std::string run_dir = out_dir + "/run_" + std::to_string(cell);
    fs::create_directories(run_dir);
    cells[cell].outputs.trajectory_csv = run_dir + "/trajectory.csv";
    cells[cell].outputs.state_json = run_dir + "/state.json";
    cells[cell].outputs.report_json = run_dir + "/report.json";
    cells[cell].outputs.manifest_json = run_dir + "/manifest.json";
    if (!j["grid"].contains("seed")) {
      cells[cell].optim.seed = hug::Rng::derive(base.optim.seed, cell);
    }
  }

  // Cells are independent; fan out across a fixed-size worker pool.
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(total)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t cell = next.fetch_add(1); cell < total;
           cell = next.fetch_add(1)) {
        try {
          hug::experiment(cells[cell]);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) {
            first_error = "run_" + std::to_string(cell) + ": " + e.what();
          }
        }
      }
    });
  }
  for (std::thread& worker : pool) worker.join();
  if (failed) throw hug::Error("sweep failed: " + first_error);

  json summary{{"cells", total}, {"out_dir", out_dir}};
  write_file(out_dir + "/sweep_summary.json", summary.dump(2) + "\n");
  std::printf("completed %zu runs into %s\n", total, out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperspherical uniformity gap losses and generalized "
               "neural collapse diagnostics"};
  app.set_version_flag("--version", hug::kLibraryVersion);
  app.require_subcommand(1);

  OptimizeArgs optimize_args;
  CLI::App* optimize = app.add_subcommand(
      "optimize", "Minimize the Riesz s-energy of n free points on S^{d-1}");
  optimize->add_option("--n", optimize_args.n, "Point count")->required();
  optimize->add_option("--d", optimize_args.d, "Ambient dimension")->required();
  optimize->add_option("--s", optimize_args.s, "Riesz exponent")
      ->default_val(2.0);
  optimize->add_option("--restarts", optimize_args.restarts, "Random restarts");
  optimize->add_option("--iters", optimize_args.iters, "Max iterations");
  optimize->add_option("--step", optimize_args.step, "Initial step size");
  optimize->add_option("--seed", optimize_args.seed, "Base seed");
  optimize->add_option("--out", optimize_args.out, "Write the configuration JSON");

  std::string train_config;
  CLI::App* train = app.add_subcommand("train", "Run a full experiment from a config");
  train->add_option("--config", train_config, "ExperimentConfig JSON path")
      ->required();

  std::string diagnose_state;
  std::string diagnose_out;
  CLI::App* diagnose =
      app.add_subcommand("diagnose", "GNC diagnostic report for a saved state");
  diagnose->add_option("--state", diagnose_state, "LabeledState JSON path")
      ->required();
  diagnose->add_option("--out", diagnose_out, "Write the report here");

  std::string verify_suite;
  std::string verify_out;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Run a theorem-verification suite");
  verify_cmd
      ->add_option("--suite", verify_suite,
                   "etf | cross_polytope | asymptotic | init_energy | "
                   "energy_order | mhs_limit | ce_bounds | surrogate_bound | all")
      ->required();
  verify_cmd->add_option("--out", verify_out, "Write the JSON report here");

  std::string sweep_config;
  int sweep_threads = static_cast<int>(std::thread::hardware_concurrency());
  CLI::App* sweep = app.add_subcommand("sweep", "Cartesian grid of experiments");
  sweep->add_option("--config", sweep_config, "Sweep JSON (base, grid, out_dir)")
      ->required();
  sweep->add_option("--threads", sweep_threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*optimize) return cmd_optimize(optimize_args);
    if (*train) return cmd_train(train_config);
    if (*diagnose) return cmd_diagnose(diagnose_state, diagnose_out);
    if (*verify_cmd) return cmd_verify(verify_suite, verify_out);
    if (*sweep) return cmd_sweep(sweep_config, sweep_threads);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
