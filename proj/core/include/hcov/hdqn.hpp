#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "hcov/grid_env.hpp"
#include "hcov/mlp.hpp"

namespace hcov {

struct Transition {
  std::vector<double> obs, next_obs;
  int action = 0;
  double reward = 0.0;
  bool done = false;
};

/// Fixed-capacity ring with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_[i]; }
  std::vector<const Transition*> sample(std::size_t batch,
                                        std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

struct DqnConfig {
  double gamma = 0.99;
  int batch = 64;
  int target_sync_every = 1000;  // environment steps
  double eps_start = 0.3;
  double eps_end = 0.05;
  std::size_t replay_capacity = 100000;
  AdamConfig adam;               // lr 3e-4
  bool curve_exploration = true; // false -> uniform random epsilon branch
};

/// Linear schedule eps_start -> eps_end over total steps, clamped.
double epsilon_at(const DqnConfig& cfg, long step, long total_steps);

/// Epsilon branch takes `explore_action` (curve-guided or uniform random,
/// chosen by the caller); otherwise greedy argmax with lowest-index ties.
Action dqn_select_action(const MlpNet& qnet, const Observation& obs, double eps,
                         Action explore_action, std::mt19937_64& rng);

/// Curve-following action for the agent's cell; uniform random valid move
/// when the curve step is blocked.
Action guided_action(const GridEnv& env, int agent, std::mt19937_64& rng);

double td_target(double reward, const MlpNet& target_net,
                 const Observation& next_obs, bool done, double gamma);

/// One Adam step on the mean squared TD error over a uniform minibatch.
/// Returns the pre-update loss, or nullopt when the buffer is too small.
std::optional<double> dqn_train_step(const ReplayBuffer& buffer, MlpNet& qnet,
                                     const MlpNet& target_net, AdamState& adam,
                                     const DqnConfig& cfg,
                                     std::mt19937_64& rng);

}  // namespace hcov
