#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hcov/grid_env.hpp"
#include "hcov/mlp.hpp"

namespace hcov {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double bias_start = 0.3;  // curve-bias epsilon
  double bias_min = 0.05;
  double kappa = 0.0;       // 0 -> derived so bias_start decays to bias_min
  int epochs = 4;
  int minibatch = 64;
  int horizon = 128;        // environment steps per rollout
  AdamConfig adam_pi;
  AdamConfig adam_v;
  bool curve_bias = true;
  bool mixture_ratio = true;  // false -> literal pi_old denominator
  double entropy_coef = 0.0;
};

struct RolloutStep {
  std::vector<double> obs;
  int action = 0;
  double logp_behavior = 0.0;  // mixture behavior policy
  double logp_policy = 0.0;    // policy at collection time
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

/// Per-agent lanes of one on-policy rollout, plus GAE outputs.
struct RolloutBuffer {
  std::vector<std::vector<RolloutStep>> lanes;  // [agent][t]
  std::vector<std::vector<double>> advantages;
  std::vector<std::vector<double>> value_targets;
  void clear();
};

struct SampledAction {
  int action = 0;
  double logp_behavior = 0.0;
  double logp_policy = 0.0;
};

/// Mixture sampling: curve-branch distribution with prob eps_bias, policy
/// softmax otherwise. curve_dist is the curve branch over the 5 actions
/// (a point mass, or uniform over valid moves when the curve step is
/// blocked). The stored behavior log-prob is the mixture probability.
SampledAction ppo_sample_action(const MlpNet& policy,
                                std::span<const double> obs, double eps_bias,
                                std::span<const double> curve_dist,
                                std::mt19937_64& rng);

/// Point-mass / fallback-uniform curve branch distribution for an agent.
std::vector<double> curve_branch_distribution(const GridEnv& env, int agent);

/// delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t;
/// A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}; targets = A + V.
/// bootstrap_value is V of the state after the last step (0 if terminal).
void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap_value,
                 double gamma, double lambda, std::vector<double>& advantages,
                 std::vector<double>& value_targets);

double anneal(double eps_bias, double kappa, double eps_min);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int skipped = 0;  // non-finite ratios
};

/// Clipped-surrogate update with advantage normalization; value regression
/// with squared loss. Advantages must be computed beforehand.
PpoStats ppo_update(const RolloutBuffer& buffer, MlpNet& policy,
                    AdamState& adam_pi, MlpNet& value, AdamState& adam_v,
                    const PpoConfig& cfg, std::mt19937_64& rng);

}  // namespace hcov
