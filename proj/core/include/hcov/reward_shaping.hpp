#pragma once

#include <cstddef>
#include <string>

namespace hcov {

enum class ShapingMode { None, Heuristic, Potential };

struct ShapingConfig {
  ShapingMode mode = ShapingMode::Potential;
  double alpha = 0.01;  // potential scale, Phi(rank) = alpha * rank
  double r_h = 0.05;    // heuristic curve-progress bonus
  double gamma = 0.99;  // shared with the learner
};

/// Reward transform over Hilbert ranks.
///   potential: r + gamma*alpha*rank_next - alpha*rank
///   heuristic: r + r_h iff rank_next == rank + 1
///   none:      identity
double shaped_reward(double r, std::size_t rank, std::size_t rank_next,
                     const ShapingConfig& cfg);

ShapingMode shaping_mode_from_string(const std::string& s);
std::string to_string(ShapingMode m);

}  // namespace hcov
