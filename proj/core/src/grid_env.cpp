#include "hcov/grid_env.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>

namespace hcov {

namespace {

std::size_t flat(const EnvConfig& cfg, int x, int y) {
  return static_cast<std::size_t>(y) * cfg.width + x;
}

}  // namespace

GridEnv::GridEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.width < 5 || cfg_.height < 5) {
    throw std::invalid_argument("GridEnv: width and height must be >= 5");
  }
  if (cfg_.n_agents < 1) {
    throw std::invalid_argument("GridEnv: need at least one agent");
  }
  if (cfg_.obs_radius < 1) {
    throw std::invalid_argument("GridEnv: obs_radius must be >= 1");
  }
  std::vector<std::uint8_t> blocked(
      static_cast<std::size_t>(cfg_.width) * cfg_.height, 0);
  for (const Cell& c : cfg_.obstacle_cells) {
    if (c.x < 0 || c.x >= cfg_.width || c.y < 0 || c.y >= cfg_.height) {
      throw std::invalid_argument("GridEnv: obstacle out of bounds");
    }
    blocked[flat(cfg_, c.x, c.y)] = 1;
  }
  for (const Cell& c : cfg_.target_cells) {
    if (c.x < 0 || c.x >= cfg_.width || c.y < 0 || c.y >= cfg_.height ||
        blocked[flat(cfg_, c.x, c.y)]) {
      throw std::invalid_argument("GridEnv: target on obstacle or out of bounds");
    }
  }
  map_ = std::make_shared<HilbertMap>(cfg_.width, cfg_.height, blocked);
  if (map_->active_count() < static_cast<std::size_t>(cfg_.n_agents)) {
    throw std::invalid_argument("GridEnv: more agents than active cells");
  }
  horizon_ = cfg_.horizon > 0
                 ? cfg_.horizon
                 : static_cast<int>(4 * map_->active_count() / cfg_.n_agents);
  reset(cfg_.seed);
}

std::vector<Observation> GridEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  const std::size_t A = map_->active_count();
  const int N = cfg_.n_agents;

  agents_.clear();
  visits_.assign(static_cast<std::size_t>(cfg_.width) * cfg_.height, 0);
  target_.assign(static_cast<std::size_t>(cfg_.width) * cfg_.height, 0);
  covered_ = 0;
  total_visits_ = 0;
  step_count_ = 0;
  done_ = false;

  // Evenly spaced spawn ranks floor(i*A/N).
  for (int i = 0; i < N; ++i) {
    const std::size_t rank = static_cast<std::size_t>(i) * A / N;
    const Cell c = map_->cell_of_rank(rank);
    AgentState st;
    st.cell = c;
    st.rank = rank;
    st.h = A >= 2 ? map_->normalized_index(c.x, c.y) : 0.0;
    agents_.push_back(st);
    if (visits_[flat(cfg_, c.x, c.y)]++ == 0) ++covered_;
    ++total_visits_;
  }

  place_targets(rng_);

  done_ = covered_ == A;
  std::vector<Observation> obs;
  obs.reserve(agents_.size());
  for (int i = 0; i < N; ++i) obs.push_back(observe(i));
  return obs;
}

void GridEnv::place_targets(std::mt19937_64& rng) {
  n_targets_left_ = 0;
  if (!cfg_.target_cells.empty()) {
    for (const Cell& c : cfg_.target_cells) {
      if (!map_->active(c.x, c.y)) continue;  // obstacle-masked targets dropped
      if (!target_[flat(cfg_, c.x, c.y)]) {
        target_[flat(cfg_, c.x, c.y)] = 1;
        ++n_targets_left_;
      }
    }
    return;
  }
  std::vector<Cell> candidates;
  candidates.reserve(map_->active_count());
  for (std::size_t r = 0; r < map_->active_count(); ++r) {
    const Cell c = map_->cell_of_rank(r);
    bool spawn = false;
    for (const AgentState& a : agents_) {
      if (a.cell == c) { spawn = true; break; }
    }
    if (!spawn) candidates.push_back(c);
  }
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const std::size_t n =
      std::min<std::size_t>(cfg_.n_targets, candidates.size());
  for (std::size_t i = 0; i < n; ++i) {
    target_[flat(cfg_, candidates[i].x, candidates[i].y)] = 1;
    ++n_targets_left_;
  }
}

bool GridEnv::move_blocked(Cell c, Action a) const {
  const Cell n = apply_action(c, a);
  if (n.x < 0 || n.x >= cfg_.width || n.y < 0 || n.y >= cfg_.height) return true;
  return !map_->active(n.x, n.y);
}

std::vector<Action> GridEnv::valid_moves(Cell c) const {
  std::vector<Action> out;
  for (Action a : {Action::North, Action::South, Action::East, Action::West}) {
    if (!move_blocked(c, a)) out.push_back(a);
  }
  return out;
}

std::uint64_t GridEnv::visit_count(int x, int y) const {
  return visits_[flat(cfg_, x, y)];
}

bool GridEnv::is_target(int x, int y) const {
  return target_[flat(cfg_, x, y)] != 0;
}

Observation GridEnv::observe(int agent) const {
  const int r = cfg_.obs_radius;
  const int w = 2 * r + 1;
  const AgentState& self = agents_[agent];
  Observation o;
  o.data.assign(static_cast<std::size_t>(3) * w * w + 1, 0.0);

  const std::size_t ch = static_cast<std::size_t>(w) * w;
  std::size_t i = 0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx, ++i) {
      const int x = self.cell.x + dx;
      const int y = self.cell.y + dy;
      if (x < 0 || x >= cfg_.width || y < 0 || y >= cfg_.height ||
          !map_->active(x, y)) {
        o.data[i] = 1.0;  // obstacle / out of bounds
        continue;
      }
      if (visits_[flat(cfg_, x, y)] > 0) o.data[ch + i] = 1.0;
      for (std::size_t k = 0; k < agents_.size(); ++k) {
        if (static_cast<int>(k) != agent && agents_[k].cell.x == x &&
            agents_[k].cell.y == y) {
          o.data[2 * ch + i] = 1.0;
          break;
        }
      }
    }
  }
  if (cfg_.hilbert_obs) o.data[3 * ch] = self.h;
  return o;
}

StepResult GridEnv::step(const std::vector<Action>& actions) {
  if (done_) {
    throw std::logic_error("GridEnv: step after episode end");
  }
  if (actions.size() != agents_.size()) {
    throw std::domain_error("GridEnv: action vector length mismatch");
  }

  StepResult res;
  res.rewards.resize(agents_.size(), 0.0);
  res.task_rewards.resize(agents_.size(), 0.0);

  // Simultaneous moves, co-occupancy allowed; blocked moves stay in place.
  std::vector<std::size_t> prev_rank(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    prev_rank[i] = agents_[i].rank;
    if (!move_blocked(agents_[i].cell, actions[i])) {
      agents_[i].cell = apply_action(agents_[i].cell, actions[i]);
      agents_[i].rank = map_->rank_of(agents_[i].cell.x, agents_[i].cell.y);
      agents_[i].h = map_->active_count() >= 2
                         ? map_->normalized_index(agents_[i].cell.x,
                                                  agents_[i].cell.y)
                         : 0.0;
    }
  }

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const Cell c = agents_[i].cell;
    const std::size_t f = flat(cfg_, c.x, c.y);
    if (visits_[f]++ == 0) {
      ++covered_;
      res.newly_covered.push_back(c);
    }
    ++total_visits_;
    double task = 0.0;
    if (target_[f]) {  // first arriving agent (index order) claims it
      target_[f] = 0;
      --n_targets_left_;
      task = 1.0;
    }
    res.task_rewards[i] = task;
    res.rewards[i] = shaped_reward(task, prev_rank[i], agents_[i].rank,
                                   cfg_.shaping);
  }

  ++step_count_;
  done_ = covered_ == map_->active_count() || step_count_ >= horizon_;
  res.done = done_;
  res.obs.reserve(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    res.obs.push_back(observe(static_cast<int>(i)));
  }
  return res;
}

double GridEnv::coverage_ratio() const {
  return static_cast<double>(covered_) /
         static_cast<double>(map_->active_count());
}

double GridEnv::redundancy() const {
  if (covered_ == 0) {
    throw std::logic_error("GridEnv: redundancy undefined with zero visits");
  }
  return static_cast<double>(total_visits_) / static_cast<double>(covered_);
}

void apply_map_file(EnvConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("map file not found: " + path);
  }
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) {
    throw std::invalid_argument("map file empty: " + path);
  }
  const std::size_t width = rows[0].size();
  cfg.obstacle_cells.clear();
  cfg.target_cells.clear();
  for (std::size_t y = 0; y < rows.size(); ++y) {
    if (rows[y].size() != width) {
      throw std::invalid_argument("map file has ragged rows: " + path);
    }
    for (std::size_t x = 0; x < width; ++x) {
      const int cx = static_cast<int>(x);
      const int cy = static_cast<int>(y);
      switch (rows[y][x]) {
        case '.': break;
        case '#': cfg.obstacle_cells.push_back({cx, cy}); break;
        case 'T': cfg.target_cells.push_back({cx, cy}); break;
        default:
          throw std::invalid_argument("map file has unknown cell char: " +
                                      std::string(1, rows[y][x]));
      }
    }
  }
  cfg.width = static_cast<int>(width);
  cfg.height = static_cast<int>(rows.size());
}

}  // namespace hcov
