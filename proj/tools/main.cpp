// hcov: train/evaluate Hilbert-augmented coverage agents and export their
// plans as timed SE(2) trajectories and discrete motion primitives.
//
// Exit codes: 0 ok, 1 internal error, 2 invalid config/input,
//             3 non-finite loss during training, 4 trajectory validation
//             failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcov/config.hpp"
#include "hcov/se2_trajectory.hpp"
#include "hcov/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) {
    if (const char* root = std::getenv("HCOV_OUT_ROOT")) {
      return fs::path(root) / p;
    }
  }
  return p;
}

int cmd_train(const std::string& config_path, const std::string& out_override,
              long seed_override, long steps_override) {
  hcov::RunConfig cfg;
  try {
    cfg = hcov::load_run_config(config_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  if (steps_override > 0) cfg.total_steps = steps_override;

  try {
    hcov::train_all_seeds(cfg, resolve_out(cfg.out_dir));
  } catch (const hcov::TrainingError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  std::cout << "run complete: " << resolve_out(cfg.out_dir).string() << '\n';
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& ckpt,
             long seed) {
  hcov::RunConfig cfg;
  hcov::GreedyPolicy policy;
  try {
    cfg = hcov::load_run_config(config_path);
    policy = hcov::greedy_policy_from_checkpoint(ckpt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const std::uint64_t s = seed >= 0 ? seed : cfg.seeds.front();
  const hcov::EvalRecord rec = hcov::evaluate_policy(cfg, policy, 0, s);
  std::cout << "reward " << rec.reward << "\ncoverage " << rec.coverage
            << "\nredundancy " << rec.redundancy << '\n';
  return 0;
}

int cmd_compare(const std::vector<std::string>& run_dirs,
                const std::string& out_csv) {
  struct Row {
    std::string algo;
    int n_agents = 0;
    double cov = 0, cov_ci = 0, red = 0, red_ci = 0, rew = 0, rew_ci = 0;
    double tconv = 0;
    bool tconv_valid = false;
    int censored = 0;
  };
  std::vector<Row> rows;
  std::vector<std::string> excluded;
  for (const std::string& dir : run_dirs) {
    const fs::path summary = fs::path(dir) / "summary.json";
    if (!fs::exists(summary)) {
      excluded.push_back(dir);
      continue;
    }
    std::ifstream in(summary);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception&) {
      excluded.push_back(dir);
      continue;
    }
    Row r;
    r.algo = j.value("algo", "?");
    r.n_agents = j.value("n_agents", 0);
    const auto& agg = j["aggregate"];
    auto get = [](const nlohmann::json& m, double& mean, double& ci) {
      mean = m.value("mean", 0.0);
      ci = m.contains("ci95") && !m["ci95"].is_null() ? m["ci95"].get<double>() : 0.0;
    };
    get(agg["coverage"], r.cov, r.cov_ci);
    get(agg["redundancy"], r.red, r.red_ci);
    get(agg["reward"], r.rew, r.rew_ci);
    if (agg["t_conv"].contains("mean")) {
      r.tconv = agg["t_conv"]["mean"].get<double>();
      r.tconv_valid = true;
    }
    r.censored = agg["t_conv"].value("censored", 0);
    rows.push_back(r);
  }
  for (const std::string& dir : excluded) {
    std::cerr << "excluded (no summary.json): " << dir << '\n';
  }
  if (rows.empty()) {
    std::cerr << "no completed runs to compare\n";
    return 2;
  }

  char buf[256];
  std::printf("%-8s %-8s %-18s %-18s %-18s %-14s\n", "algo", "agents",
              "coverage", "redundancy", "reward", "t_conv");
  std::string csv =
      "algo,n_agents,coverage,coverage_ci95,redundancy,redundancy_ci95,"
      "reward,reward_ci95,t_conv,t_conv_censored\n";
  for (const Row& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%-8s %-8d %.3f +/- %-7.3f %.3f +/- %-7.3f %.3f +/- %-7.3f ",
                  r.algo.c_str(), r.n_agents, r.cov, r.cov_ci, r.red, r.red_ci,
                  r.rew, r.rew_ci);
    std::cout << buf;
    if (r.tconv_valid) {
      std::cout << r.tconv;
    } else {
      std::cout << "inf";
    }
    if (r.censored > 0) std::cout << " (" << r.censored << " censored)";
    std::cout << '\n';
    std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,",
                  r.algo.c_str(), r.n_agents, r.cov, r.cov_ci, r.red, r.red_ci,
                  r.rew, r.rew_ci);
    csv += buf;
    csv += r.tconv_valid ? std::to_string(r.tconv) : "inf";
    csv += "," + std::to_string(r.censored) + "\n";
  }
  if (!out_csv.empty()) {
    std::ofstream out(resolve_out(out_csv));
    out << csv;
  }
  return 0;
}

int cmd_export_traj(const std::string& config_path, const std::string& ckpt,
                    bool hilbert_sweep, const std::string& out_prefix,
                    long seed, const hcov::SpeedLimits& limits,
                    double resample_ds) {
  hcov::RunConfig cfg;
  try {
    cfg = hcov::load_run_config(config_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  std::vector<hcov::Cell> cells;
  if (hilbert_sweep) {
    hcov::EnvConfig env = cfg.env;
    env.n_agents = 1;
    hcov::GridEnv probe(env);
    const hcov::HilbertMap& map = probe.map();
    for (std::size_t r = 0; r < map.active_count(); ++r) {
      cells.push_back(map.cell_of_rank(r));
    }
  } else {
    hcov::GreedyPolicy policy;
    try {
      policy = hcov::greedy_policy_from_checkpoint(ckpt);
    } catch (const std::exception& e) {
      std::cerr << "checkpoint error: " << e.what() << '\n';
      return 2;
    }
    const std::uint64_t s = seed >= 0 ? seed : cfg.seeds.front();
    cells = hcov::rollout_cell_sequence(cfg, policy, s);
  }

  hcov::WaypointPath path =
      hcov::cells_to_waypoints(cells, cfg.env.cell_size_m);
  if (resample_ds > 0.0) path = hcov::resample_by_arc_length(path, resample_ds);
  const hcov::TimedSE2Trajectory traj = hcov::time_parameterize(path, limits);
  const hcov::PrimitiveProgram prog = hcov::to_primitives(path);

  const hcov::ValidationReport rep = hcov::validate_trajectory(traj, limits);
  if (!rep.ok) {
    std::cerr << "trajectory validation failed: " << rep.violation
              << " at sample " << rep.sample_index << '\n';
    return 4;
  }
  const fs::path prefix = resolve_out(out_prefix);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  hcov::save_trajectory_json(traj, prefix.string() + ".traj.json");
  hcov::save_primitives(prog, prefix.string() + ".prims.txt");
  std::cout << "wrote " << prefix.string() << ".traj.json ("
            << traj.samples.size() << " samples, "
            << traj.samples.back().t - traj.samples.front().t << " s) and "
            << prefix.string() << ".prims.txt (" << prog.commands.size()
            << " commands)\n";
  return 0;
}

int cmd_validate_traj(const std::string& file, const hcov::SpeedLimits& limits) {
  hcov::TimedSE2Trajectory traj;
  try {
    traj = hcov::load_trajectory_json(file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const hcov::ValidationReport rep = hcov::validate_trajectory(traj, limits);
  if (!rep.ok) {
    std::cout << "FAIL " << rep.violation << " at sample " << rep.sample_index
              << '\n';
    return 4;
  }
  std::cout << "PASS (" << traj.samples.size() << " samples)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hilbert-curve multi-robot coverage: training, evaluation and "
               "SE(2) trajectory export"};
  app.require_subcommand(1);

  std::string config_path, out, ckpt, traj_file;
  long seed = -1, steps = -1;
  bool hilbert_sweep = false;
  double resample_ds = 0.0;
  hcov::SpeedLimits limits;
  std::vector<std::string> run_dirs;

  auto* train = app.add_subcommand("train", "Train one run per seed");
  train->add_option("--config", config_path, "Run config file")->required();
  train->add_option("--out", out, "Output directory override");
  train->add_option("--seed", seed, "Train a single seed only");
  train->add_option("--steps", steps, "Override train.total_steps");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint greedily");
  eval->add_option("--config", config_path, "Run config file")->required();
  eval->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  eval->add_option("--seed", seed, "Evaluation seed");

  auto* compare = app.add_subcommand("compare", "Summarize completed runs");
  compare->add_option("dirs", run_dirs, "Run directories")->required();
  compare->add_option("--out", out, "CSV output path");

  auto* exp = app.add_subcommand(
      "export-traj", "Export a greedy rollout (or the pure Hilbert sweep) as "
                     "a timed trajectory plus primitive program");
  exp->add_option("--config", config_path, "Run config file")->required();
  exp->add_option("--checkpoint", ckpt, "Policy checkpoint");
  exp->add_flag("--hilbert-sweep", hilbert_sweep, "Export the raw curve sweep");
  exp->add_option("--out", out, "Output file prefix")->required();
  exp->add_option("--seed", seed, "Rollout seed");
  exp->add_option("--v-max", limits.v_max, "Speed limit [m/s]");
  exp->add_option("--a-max", limits.a_max, "Acceleration limit [m/s^2]");
  exp->add_option("--omega-max", limits.omega_max, "Turn rate limit [rad/s]");
  exp->add_option("--resample-ds", resample_ds,
                  "Arc-length resampling step [m], 0 disables");

  auto* validate = app.add_subcommand("validate-traj",
                                      "Check a trajectory file against limits");
  validate->add_option("file", traj_file, "Trajectory JSON")->required();
  validate->add_option("--v-max", limits.v_max, "Speed limit [m/s]");
  validate->add_option("--a-max", limits.a_max, "Acceleration limit [m/s^2]");
  validate->add_option("--omega-max", limits.omega_max, "Turn rate limit [rad/s]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, out, seed, steps);
    if (eval->parsed()) return cmd_eval(config_path, ckpt, seed);
    if (compare->parsed()) return cmd_compare(run_dirs, out);
    if (exp->parsed()) {
      if (!hilbert_sweep && ckpt.empty()) {
        std::cerr << "export-traj needs --checkpoint or --hilbert-sweep\n";
        return 2;
      }
      return cmd_export_traj(config_path, ckpt, hilbert_sweep, out, seed,
                             limits, resample_ds);
    }
    if (validate->parsed()) return cmd_validate_traj(traj_file, limits);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
