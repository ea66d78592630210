#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hcov/action.hpp"
#include "hcov/hilbert.hpp"
#include "hcov/reward_shaping.hpp"

namespace hcov {

struct EnvConfig {
  int width = 32;
  int height = 32;
  std::vector<Cell> obstacle_cells;
  std::vector<Cell> target_cells;  // explicit; empty -> n_targets random
  int n_targets = 8;
  int n_agents = 4;
  int horizon = 0;  // 0 -> default 4*A/N
  int obs_radius = 2;
  std::uint64_t seed = 1;
  double cell_size_m = 2.0;
  ShapingConfig shaping;
  bool hilbert_obs = true;  // when false the h feature is zeroed
};

struct AgentState {
  Cell cell;
  std::size_t rank = 0;
  double h = 0.0;  // normalized Hilbert index
};

struct Observation {
  // Flattened 5x5x3 egocentric patch plus the scalar h: 76 values.
  // Channel-major: [obstacle/out-of-bounds, visited-by-anyone,
  // other-agent occupancy], each row-major over (dy, dx), then h.
  std::vector<double> data;
};

struct StepResult {
  std::vector<double> rewards;       // shaped, fed to the learner
  std::vector<double> task_rewards;  // base task reward only
  std::vector<Observation> obs;
  bool done = false;
  std::vector<Cell> newly_covered;
};

/// Deterministic multi-agent grid coverage environment. Single-threaded
/// per instance; independent instances may run in parallel.
class GridEnv {
 public:
  explicit GridEnv(EnvConfig cfg);  // throws std::invalid_argument

  std::vector<Observation> reset(std::uint64_t seed);
  StepResult step(const std::vector<Action>& actions);

  double coverage_ratio() const;
  double redundancy() const;  // throws std::logic_error when no visits

  const HilbertMap& map() const { return *map_; }
  const EnvConfig& config() const { return cfg_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  bool done() const { return done_; }
  int step_count() const { return step_count_; }
  int horizon() const { return horizon_; }
  std::size_t remaining_targets() const { return n_targets_left_; }
  std::uint64_t visit_count(int x, int y) const;
  bool is_target(int x, int y) const;

  bool move_blocked(Cell c, Action a) const;
  std::vector<Action> valid_moves(Cell c) const;  // non-Stay unblocked moves

  Observation observe(int agent) const;

 private:
  void place_targets(std::mt19937_64& rng);

  EnvConfig cfg_;
  std::shared_ptr<const HilbertMap> map_;
  std::vector<AgentState> agents_;
  std::vector<std::uint64_t> visits_;  // indexed y*width+x
  std::vector<std::uint8_t> target_;   // indexed y*width+x
  std::size_t n_targets_left_ = 0;
  std::size_t covered_ = 0;
  std::uint64_t total_visits_ = 0;
  int step_count_ = 0;
  int horizon_ = 0;
  bool done_ = false;
  std::mt19937_64 rng_;
};

/// Plain-text map: one line per row (row 0 = y 0), '.' free, '#' obstacle,
/// 'T' target. Overwrites width/height/obstacles/targets in cfg.
void apply_map_file(EnvConfig& cfg, const std::string& path);

}  // namespace hcov
