#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hcov/eval_metrics.hpp"
#include "hcov/grid_env.hpp"
#include "hcov/hdqn.hpp"
#include "hcov/hppo.hpp"

namespace hcov {

struct RunConfig {
  std::string algo = "hdqn";  // dqn | hdqn | ppo | hppo
  EnvConfig env;
  DqnConfig dqn;
  PpoConfig ppo;
  ConvergenceConfig convergence;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string map_file;
  std::string out_dir = "runs/out";
  long total_steps = 300000;
  long eval_every = 10000;
  int eval_episodes = 5;

  bool is_ppo_family() const { return algo == "ppo" || algo == "hppo"; }
};

/// Flat key-value text (dotted sections, '#' comments) or a JSON mirror
/// (detected by extension or leading '{'). Unknown keys and malformed
/// values throw std::invalid_argument. A referenced map file is loaded
/// into env immediately.
RunConfig load_run_config(const std::filesystem::path& path);

/// Apply a single dotted-key assignment on top of a config.
void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value);

/// Hilbert-variant switches implied by cfg.algo (observation augmentation,
/// curve-guided exploration, shaping on/off for the baselines).
void apply_algo_preset(RunConfig& cfg);

/// Writes the fully-defaulted config as flat key-value text.
void write_resolved_config(const RunConfig& cfg,
                           const std::filesystem::path& path);

}  // namespace hcov
