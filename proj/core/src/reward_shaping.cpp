#include "hcov/reward_shaping.hpp"

#include <stdexcept>

namespace hcov {

double shaped_reward(double r, std::size_t rank, std::size_t rank_next,
                     const ShapingConfig& cfg) {
  switch (cfg.mode) {
    case ShapingMode::None:
      return r;
    case ShapingMode::Heuristic:
      return rank_next == rank + 1 ? r + cfg.r_h : r;
    case ShapingMode::Potential:
      return r + cfg.gamma * cfg.alpha * static_cast<double>(rank_next) -
             cfg.alpha * static_cast<double>(rank);
  }
  return r;
}

ShapingMode shaping_mode_from_string(const std::string& s) {
  if (s == "none") return ShapingMode::None;
  if (s == "heuristic") return ShapingMode::Heuristic;
  if (s == "potential") return ShapingMode::Potential;
  throw std::invalid_argument("unknown shaping mode: " + s);
}

std::string to_string(ShapingMode m) {
  switch (m) {
    case ShapingMode::None: return "none";
    case ShapingMode::Heuristic: return "heuristic";
    case ShapingMode::Potential: return "potential";
  }
  return "none";
}

}  // namespace hcov
