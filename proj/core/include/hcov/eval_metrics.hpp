#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hcov {

struct EvalRecord {
  long step = 0;
  double reward = 0.0;  // mean cumulative task reward per agent
  double coverage = 0.0;
  double redundancy = 0.0;
  std::vector<double> per_agent_reward;
};

struct ConvergenceConfig {
  int window = 100;       // episodes per rolling window
  double threshold = 0.9; // fraction of the running max of rolling means
  int consecutive = 10;
  long eval_every = 10000;  // training steps between evaluations
};

/// First episode index (0-based) at which the rolling mean has stayed at or
/// above threshold * (running max of rolling means) for `consecutive`
/// windows; nullopt when the condition never holds.
std::optional<std::size_t> detect_convergence(
    std::span<const double> episode_rewards, const ConvergenceConfig& cfg);

struct SeedAggregate {
  double mean = 0.0;
  double half_width = 0.0;  // t-interval, n-1 dof
  int n = 0;
  int censored = 0;
};

/// Mean and t-interval half-width over seeds; throws std::invalid_argument
/// with fewer than 2 finite values.
SeedAggregate aggregate_seeds(std::span<const double> values,
                              double confidence = 0.95);

/// Censoring variant: nullopt entries are excluded from the mean and counted.
SeedAggregate aggregate_seeds(
    const std::vector<std::optional<double>>& values, double confidence = 0.95);

/// CSV schema: run_id,algo,n_agents,seed,step,reward,coverage,redundancy.
void write_eval_csv(const std::filesystem::path& path,
                    const std::string& run_id, const std::string& algo,
                    int n_agents, std::uint64_t seed,
                    std::span<const EvalRecord> records);

std::vector<EvalRecord> read_eval_csv(const std::filesystem::path& path);

}  // namespace hcov
