#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hcov/config.hpp"
#include "hcov/eval_metrics.hpp"
#include "hcov/mlp.hpp"

namespace hcov {

/// Non-finite loss or gradients during training (CLI exit code 3).
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  std::vector<EvalRecord> records;
  std::vector<double> episode_rewards;  // mean cumulative task reward per agent
  std::optional<std::size_t> t_conv;
  EvalRecord final_eval;
};

using GreedyPolicy = std::function<int(const std::vector<double>& obs)>;

/// Greedy evaluation rollouts (no exploration, no curve bias), task reward
/// only, cfg.eval_episodes episodes with seeds derived from eval_seed_base.
EvalRecord evaluate_policy(const RunConfig& cfg, const GreedyPolicy& policy,
                           long step, std::uint64_t eval_seed_base);

/// One full training run. Writes eval.csv and checkpoints into seed_dir.
TrainResult train_one_seed(const RunConfig& cfg, std::uint64_t seed,
                           const std::filesystem::path& seed_dir);

/// Runs every configured seed sequentially and writes
/// out_root/config.resolved.cfg and out_root/summary.json.
void train_all_seeds(const RunConfig& cfg,
                     const std::filesystem::path& out_root);

/// Greedy argmax policy loaded from a checkpoint (Q-net or policy logits).
GreedyPolicy greedy_policy_from_checkpoint(const std::filesystem::path& ckpt);

/// Cells visited by a single greedy agent on cfg.env (n_agents forced to 1),
/// in visit order starting at the spawn cell.
std::vector<Cell> rollout_cell_sequence(const RunConfig& cfg,
                                        const GreedyPolicy& policy,
                                        std::uint64_t seed);

}  // namespace hcov
