#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "hcov/hdqn.hpp"

using namespace hcov;

TEST_CASE("epsilon schedule is linear and clamped") {
  DqnConfig cfg;  // 0.3 -> 0.05
  CHECK(epsilon_at(cfg, 0, 1000) == doctest::Approx(0.3));
  CHECK(epsilon_at(cfg, 500, 1000) == doctest::Approx(0.175));
  CHECK(epsilon_at(cfg, 1000, 1000) == doctest::Approx(0.05));
  CHECK(epsilon_at(cfg, 2000, 1000) == doctest::Approx(0.05));
  CHECK(epsilon_at(cfg, -5, 1000) == doctest::Approx(0.3));
  CHECK(epsilon_at(cfg, 10, 0) == doctest::Approx(0.05));
}

TEST_CASE("replay buffer ring semantics") {
  ReplayBuffer buf(4);
  CHECK(buf.capacity() == 4);
  for (int i = 0; i < 6; ++i) {
    Transition t;
    t.action = i;
    buf.push(std::move(t));
  }
  CHECK(buf.size() == 4);
  // Oldest two (0,1) were overwritten by 4,5.
  std::vector<int> actions;
  for (std::size_t i = 0; i < buf.size(); ++i) actions.push_back(buf.at(i).action);
  std::sort(actions.begin(), actions.end());
  CHECK(actions == std::vector<int>{2, 3, 4, 5});

  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(buf.sample(5, rng), std::logic_error);
  CHECK_THROWS_AS(ReplayBuffer{0}, std::invalid_argument);
}

TEST_CASE("replay sampling is uniform") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 10; ++i) {
    Transition t;
    t.action = i;
    buf.push(std::move(t));
  }
  std::mt19937_64 rng(99);
  std::map<int, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    counts[buf.sample(1, rng)[0]->action]++;
  }
  // Binomial(10000, 0.1): sigma = 30, allow 3 sigma.
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(counts[i] - 1000) <= 90);
  }
}

TEST_CASE("action selection takes the explore branch with prob eps") {
  MlpNet qnet({4, 8, 5}, 17);
  Observation obs{{0.2, -0.4, 0.9, 0.1}};
  const int greedy = argmax(qnet.forward(obs.data));
  const Action explore = static_cast<Action>((greedy + 1) % kNumActions);

  std::mt19937_64 rng(5);
  CHECK(dqn_select_action(qnet, obs, 0.0, explore, rng) ==
        static_cast<Action>(greedy));
  CHECK(dqn_select_action(qnet, obs, 1.0, explore, rng) == explore);

  int took_explore = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const Action a = dqn_select_action(qnet, obs, 0.5, explore, rng);
    if (a == explore) {
      ++took_explore;
    } else {
      CHECK(a == static_cast<Action>(greedy));
    }
  }
  CHECK(std::abs(took_explore / static_cast<double>(trials) - 0.5) < 0.02);
}

TEST_CASE("guided action follows the curve when the step is free") {
  EnvConfig cfg;
  cfg.width = 8;
  cfg.height = 8;
  cfg.n_agents = 1;
  cfg.n_targets = 0;
  GridEnv env(cfg);
  env.reset(1);
  REQUIRE(env.agents()[0].cell == Cell{0, 0});
  std::mt19937_64 rng(1);
  CHECK(guided_action(env, 0, rng) ==
        env.map().curve_action(0, 0));
}

TEST_CASE("guided action falls back to a valid move when blocked") {
  // Active cells (0,0),(0,1),(1,1),(2,2); agent 1 of 2 spawns at rank 2,
  // cell (1,1). Its curve successor (2,2) is diagonal; the tie-broken
  // step N hits an obstacle, and the only open neighbor is (0,1).
  EnvConfig cfg;
  cfg.width = 5;
  cfg.height = 5;
  cfg.n_agents = 2;
  cfg.n_targets = 0;
  cfg.horizon = 10;
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      const bool active = (x == 0 && y == 0) || (x == 0 && y == 1) ||
                          (x == 1 && y == 1) || (x == 2 && y == 2);
      if (!active) cfg.obstacle_cells.push_back({x, y});
    }
  }
  GridEnv env(cfg);
  env.reset(1);
  REQUIRE(env.agents()[1].cell == Cell{1, 1});
  REQUIRE(env.map().curve_action(1, 1) == Action::North);
  REQUIRE(env.move_blocked({1, 1}, Action::North));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    CHECK(guided_action(env, 1, rng) == Action::West);
  }
}

TEST_CASE("td target") {
  MlpNet target({3, 6, 4}, 8);
  Observation next{{0.1, 0.2, 0.3}};
  const auto q = target.forward(next.data);
  const double qmax = *std::max_element(q.begin(), q.end());
  CHECK(td_target(0.7, target, next, false, 0.9) ==
        doctest::Approx(0.7 + 0.9 * qmax));
  CHECK(td_target(0.7, target, next, true, 0.9) == 0.7);
  CHECK(td_target(-1.0, target, next, true, 0.9) == -1.0);
}

TEST_CASE("train step regresses toward the TD target") {
  DqnConfig cfg;
  cfg.batch = 8;
  cfg.adam.lr = 1e-2;
  MlpNet qnet({3, 16, 5}, 21);
  const MlpNet target = qnet;
  AdamState adam = make_adam_state(qnet);
  std::mt19937_64 rng(3);

  ReplayBuffer buf(64);
  CHECK(!dqn_train_step(buf, qnet, target, adam, cfg, rng).has_value());

  // One terminal transition repeated: the fixed point is q[a] = reward.
  Transition t;
  t.obs = {0.5, -0.5, 0.25};
  t.next_obs = {0.0, 0.0, 0.0};
  t.action = 2;
  t.reward = 1.5;
  t.done = true;
  for (int i = 0; i < 16; ++i) buf.push(t);

  const auto q0 = qnet.forward(t.obs);
  const double expected_first = (q0[2] - 1.5) * (q0[2] - 1.5);
  const auto first = dqn_train_step(buf, qnet, target, adam, cfg, rng);
  REQUIRE(first.has_value());
  CHECK(*first == doctest::Approx(expected_first).epsilon(1e-10));

  double last = *first;
  for (int i = 0; i < 400; ++i) {
    last = *dqn_train_step(buf, qnet, target, adam, cfg, rng);
  }
  CHECK(last < *first);
  CHECK(last < 1e-4);
  CHECK(qnet.forward(t.obs)[2] == doctest::Approx(1.5).epsilon(1e-2));
}

TEST_CASE("non-terminal targets use the frozen target net") {
  DqnConfig cfg;
  cfg.batch = 4;
  cfg.gamma = 0.9;
  cfg.adam.lr = 5e-3;
  MlpNet qnet({2, 12, 5}, 31);
  const MlpNet target({2, 12, 5}, 99);  // frozen, different weights
  AdamState adam = make_adam_state(qnet);
  std::mt19937_64 rng(7);

  Transition t;
  t.obs = {0.3, 0.6};
  t.next_obs = {-0.2, 0.8};
  t.action = 1;
  t.reward = 0.25;
  t.done = false;
  ReplayBuffer buf(16);
  for (int i = 0; i < 8; ++i) buf.push(t);

  const double y = td_target(t.reward, target, Observation{t.next_obs},
                             false, cfg.gamma);
  for (int i = 0; i < 600; ++i) {
    dqn_train_step(buf, qnet, target, adam, cfg, rng);
  }
  // The target net never moves, so q converges to the fixed y.
  CHECK(qnet.forward(t.obs)[1] == doctest::Approx(y).epsilon(1e-2));
}
