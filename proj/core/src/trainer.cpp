#include "hcov/trainer.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace hcov {

namespace {

constexpr std::size_t kHidden = 128;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + salt + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::string rng_to_string(const std::mt19937_64& rng) {
  std::stringstream ss;
  ss << rng;
  return ss.str();
}

std::size_t observation_length(const RunConfig& cfg) {
  const int w = 2 * cfg.env.obs_radius + 1;
  return static_cast<std::size_t>(3) * w * w + 1;
}

struct EpisodeTracker {
  std::vector<double> cumulative;  // per agent, task reward
  std::vector<double> episode_rewards;

  void begin(int n_agents) { cumulative.assign(n_agents, 0.0); }
  void add(const std::vector<double>& task_rewards) {
    for (std::size_t i = 0; i < task_rewards.size(); ++i) {
      cumulative[i] += task_rewards[i];
    }
  }
  void finish() {
    double mean = 0.0;
    for (double c : cumulative) mean += c;
    episode_rewards.push_back(mean / static_cast<double>(cumulative.size()));
  }
};

}  // namespace

EvalRecord evaluate_policy(const RunConfig& cfg, const GreedyPolicy& policy,
                           long step, std::uint64_t eval_seed_base) {
  EvalRecord rec;
  rec.step = step;
  rec.per_agent_reward.assign(cfg.env.n_agents, 0.0);
  double coverage = 0.0, redundancy = 0.0, reward = 0.0;
  GridEnv env(cfg.env);
  for (int ep = 0; ep < cfg.eval_episodes; ++ep) {
    std::vector<Observation> obs = env.reset(mix_seed(eval_seed_base, ep));
    std::vector<double> cumulative(cfg.env.n_agents, 0.0);
    while (!env.done()) {
      std::vector<Action> actions(cfg.env.n_agents);
      for (int i = 0; i < cfg.env.n_agents; ++i) {
        actions[i] = static_cast<Action>(policy(obs[i].data));
      }
      StepResult res = env.step(actions);
      for (int i = 0; i < cfg.env.n_agents; ++i) {
        cumulative[i] += res.task_rewards[i];
      }
      obs = std::move(res.obs);
    }
    double ep_mean = 0.0;
    for (int i = 0; i < cfg.env.n_agents; ++i) {
      rec.per_agent_reward[i] += cumulative[i] / cfg.eval_episodes;
      ep_mean += cumulative[i];
    }
    reward += ep_mean / cfg.env.n_agents;
    coverage += env.coverage_ratio();
    redundancy += env.redundancy();
  }
  rec.reward = reward / cfg.eval_episodes;
  rec.coverage = coverage / cfg.eval_episodes;
  rec.redundancy = redundancy / cfg.eval_episodes;
  return rec;
}

namespace {

TrainResult train_dqn_seed(const RunConfig& cfg, std::uint64_t seed,
                           const std::filesystem::path& seed_dir) {
  const std::size_t obs_len = observation_length(cfg);
  MlpNet qnet({obs_len, kHidden, kHidden, kNumActions}, mix_seed(seed, 101));
  MlpNet target = qnet;
  AdamState adam = make_adam_state(qnet);
  ReplayBuffer buffer(cfg.dqn.replay_capacity);
  std::mt19937_64 rng(mix_seed(seed, 202));

  GreedyPolicy greedy = [&qnet](const std::vector<double>& obs) {
    return argmax(qnet.forward(obs));
  };

  GridEnv env(cfg.env);
  EpisodeTracker tracker;
  TrainResult result;

  long episode = 0;
  std::vector<Observation> obs = env.reset(mix_seed(seed, episode));
  tracker.begin(cfg.env.n_agents);

  std::uniform_int_distribution<int> random_action(0, kNumActions - 1);
  std::vector<Action> actions(cfg.env.n_agents);

  for (long t = 0; t < cfg.total_steps; ++t) {
    const double eps = epsilon_at(cfg.dqn, t, cfg.total_steps);
    for (int i = 0; i < cfg.env.n_agents; ++i) {
      const Action explore =
          cfg.dqn.curve_exploration
              ? guided_action(env, i, rng)
              : static_cast<Action>(random_action(rng));
      actions[i] = dqn_select_action(qnet, obs[i], eps, explore, rng);
    }
    StepResult res = env.step(actions);
    tracker.add(res.task_rewards);
    for (int i = 0; i < cfg.env.n_agents; ++i) {
      Transition tr;
      tr.obs = obs[i].data;
      tr.next_obs = res.obs[i].data;
      tr.action = static_cast<int>(actions[i]);
      tr.reward = res.rewards[i];
      tr.done = res.done;
      buffer.push(std::move(tr));
    }
    obs = std::move(res.obs);

    try {
      const auto loss =
          dqn_train_step(buffer, qnet, target, adam, cfg.dqn, rng);
      if (loss && !std::isfinite(*loss)) {
        throw TrainingError("non-finite TD loss at step " + std::to_string(t));
      }
    } catch (const std::runtime_error& e) {
      throw TrainingError(e.what());
    }
    if ((t + 1) % cfg.dqn.target_sync_every == 0) target = qnet;

    if (res.done) {
      tracker.finish();
      ++episode;
      obs = env.reset(mix_seed(seed, episode));
      tracker.begin(cfg.env.n_agents);
    }
    if ((t + 1) % cfg.eval_every == 0) {
      result.records.push_back(
          evaluate_policy(cfg, greedy, t + 1, mix_seed(seed, 0xe7a1)));
    }
  }

  result.episode_rewards = tracker.episode_rewards;
  result.t_conv = detect_convergence(result.episode_rewards, cfg.convergence);
  if (!result.records.empty()) result.final_eval = result.records.back();
  save_checkpoint(qnet, adam, rng_to_string(rng), seed_dir / "qnet.ckpt");
  return result;
}

TrainResult train_ppo_seed(const RunConfig& cfg, std::uint64_t seed,
                           const std::filesystem::path& seed_dir) {
  const std::size_t obs_len = observation_length(cfg);
  MlpNet policy({obs_len, kHidden, kHidden, kNumActions}, mix_seed(seed, 303));
  MlpNet value({obs_len, kHidden, kHidden, 1}, mix_seed(seed, 404));
  AdamState adam_pi = make_adam_state(policy);
  AdamState adam_v = make_adam_state(value);
  std::mt19937_64 rng(mix_seed(seed, 505));

  GreedyPolicy greedy = [&policy](const std::vector<double>& obs) {
    return argmax(policy.forward(obs));
  };

  GridEnv env(cfg.env);
  EpisodeTracker tracker;
  TrainResult result;

  const long iterations =
      (cfg.total_steps + cfg.ppo.horizon - 1) / cfg.ppo.horizon;
  double kappa = cfg.ppo.kappa;
  if (kappa <= 0.0) {
    kappa = iterations > 1 ? std::pow(cfg.ppo.bias_min / cfg.ppo.bias_start,
                                      1.0 / static_cast<double>(iterations - 1))
                           : 1.0;
  }
  double eps_bias = cfg.ppo.curve_bias ? cfg.ppo.bias_start : 0.0;

  long episode = 0;
  std::vector<Observation> obs = env.reset(mix_seed(seed, episode));
  tracker.begin(cfg.env.n_agents);

  long global_step = 0;
  long next_eval = cfg.eval_every;
  const int N = cfg.env.n_agents;

  for (long iter = 0; iter < iterations; ++iter) {
    RolloutBuffer buffer;
    buffer.lanes.assign(N, {});
    bool rollout_ends_done = false;

    for (int t = 0; t < cfg.ppo.horizon; ++t) {
      std::vector<Action> actions(N);
      std::vector<RolloutStep> steps(N);
      for (int i = 0; i < N; ++i) {
        const std::vector<double> curve_dist =
            eps_bias > 0.0 ? curve_branch_distribution(env, i)
                           : std::vector<double>(kNumActions, 0.0);
        const SampledAction sa =
            ppo_sample_action(policy, obs[i].data, eps_bias, curve_dist, rng);
        actions[i] = static_cast<Action>(sa.action);
        steps[i].obs = obs[i].data;
        steps[i].action = sa.action;
        steps[i].logp_behavior = sa.logp_behavior;
        steps[i].logp_policy = sa.logp_policy;
        steps[i].value = value.forward(obs[i].data)[0];
      }
      StepResult res = env.step(actions);
      tracker.add(res.task_rewards);
      for (int i = 0; i < N; ++i) {
        steps[i].reward = res.rewards[i];
        steps[i].done = res.done;
        buffer.lanes[i].push_back(std::move(steps[i]));
      }
      obs = std::move(res.obs);
      ++global_step;
      rollout_ends_done = res.done;
      if (res.done) {
        tracker.finish();
        ++episode;
        obs = env.reset(mix_seed(seed, episode));
        tracker.begin(N);
      }
    }

    buffer.advantages.assign(N, {});
    buffer.value_targets.assign(N, {});
    for (int i = 0; i < N; ++i) {
      const std::size_t T = buffer.lanes[i].size();
      std::vector<double> rewards(T), values(T);
      std::vector<std::uint8_t> dones(T);
      for (std::size_t t = 0; t < T; ++t) {
        rewards[t] = buffer.lanes[i][t].reward;
        values[t] = buffer.lanes[i][t].value;
        dones[t] = buffer.lanes[i][t].done ? 1 : 0;
      }
      const double bootstrap =
          rollout_ends_done ? 0.0 : value.forward(obs[i].data)[0];
      compute_gae(rewards, values, dones, bootstrap, cfg.ppo.gamma,
                  cfg.ppo.gae_lambda, buffer.advantages[i],
                  buffer.value_targets[i]);
    }

    try {
      const PpoStats stats =
          ppo_update(buffer, policy, adam_pi, value, adam_v, cfg.ppo, rng);
      if (!std::isfinite(stats.policy_loss) ||
          !std::isfinite(stats.value_loss)) {
        throw TrainingError("non-finite PPO loss at iteration " +
                            std::to_string(iter));
      }
    } catch (const std::runtime_error& e) {
      throw TrainingError(e.what());
    }

    if (cfg.ppo.curve_bias) {
      eps_bias = anneal(eps_bias, kappa, cfg.ppo.bias_min);
    }
    if (global_step >= next_eval) {
      result.records.push_back(
          evaluate_policy(cfg, greedy, global_step, mix_seed(seed, 0xe7a1)));
      next_eval += cfg.eval_every;
    }
  }

  result.episode_rewards = tracker.episode_rewards;
  result.t_conv = detect_convergence(result.episode_rewards, cfg.convergence);
  if (!result.records.empty()) result.final_eval = result.records.back();
  save_checkpoint(policy, adam_pi, rng_to_string(rng), seed_dir / "policy.ckpt");
  save_checkpoint(value, adam_v, rng_to_string(rng), seed_dir / "value.ckpt");
  return result;
}

}  // namespace

TrainResult train_one_seed(const RunConfig& cfg, std::uint64_t seed,
                           const std::filesystem::path& seed_dir) {
  std::filesystem::create_directories(seed_dir);
  TrainResult result = cfg.is_ppo_family() ? train_ppo_seed(cfg, seed, seed_dir)
                                           : train_dqn_seed(cfg, seed, seed_dir);
  const std::string run_id = seed_dir.parent_path().filename().string();
  write_eval_csv(seed_dir / "eval.csv", run_id, cfg.algo, cfg.env.n_agents,
                 seed, result.records);
  return result;
}

void train_all_seeds(const RunConfig& cfg,
                     const std::filesystem::path& out_root) {
  std::filesystem::create_directories(out_root);
  write_resolved_config(cfg, out_root / "config.resolved.cfg");

  nlohmann::ordered_json summary;
  summary["run_id"] = out_root.filename().string();
  summary["algo"] = cfg.algo;
  summary["n_agents"] = cfg.env.n_agents;
  summary["seeds"] = nlohmann::ordered_json::array();

  std::vector<double> coverages, redundancies, rewards;
  std::vector<std::optional<double>> t_convs;
  for (std::uint64_t seed : cfg.seeds) {
    const auto seed_dir = out_root / ("seed_" + std::to_string(seed));
    const TrainResult r = train_one_seed(cfg, seed, seed_dir);
    nlohmann::ordered_json s;
    s["seed"] = seed;
    s["final_reward"] = r.final_eval.reward;
    s["final_coverage"] = r.final_eval.coverage;
    s["final_redundancy"] = r.final_eval.redundancy;
    if (r.t_conv) {
      s["t_conv"] = *r.t_conv;
      t_convs.emplace_back(static_cast<double>(*r.t_conv));
    } else {
      s["t_conv"] = nullptr;
      t_convs.emplace_back(std::nullopt);
    }
    summary["seeds"].push_back(s);
    coverages.push_back(r.final_eval.coverage);
    redundancies.push_back(r.final_eval.redundancy);
    rewards.push_back(r.final_eval.reward);
  }

  auto aggregate = [](const std::vector<double>& v) {
    nlohmann::ordered_json j;
    if (v.size() >= 2) {
      const SeedAggregate a = aggregate_seeds(std::span<const double>(v));
      j["mean"] = a.mean;
      j["ci95"] = a.half_width;
    } else if (v.size() == 1) {
      j["mean"] = v[0];
      j["ci95"] = nullptr;
    }
    return j;
  };
  summary["aggregate"]["coverage"] = aggregate(coverages);
  summary["aggregate"]["redundancy"] = aggregate(redundancies);
  summary["aggregate"]["reward"] = aggregate(rewards);

  int censored = 0;
  std::vector<double> finite_tconv;
  for (const auto& t : t_convs) {
    if (t) {
      finite_tconv.push_back(*t);
    } else {
      ++censored;
    }
  }
  summary["aggregate"]["t_conv"] = aggregate(finite_tconv);
  summary["aggregate"]["t_conv"]["censored"] = censored;

  std::ofstream out(out_root / "summary.json");
  out << summary.dump(2) << '\n';
}

GreedyPolicy greedy_policy_from_checkpoint(const std::filesystem::path& ckpt) {
  auto net = std::make_shared<MlpNet>();
  AdamState state;
  std::string rng_state;
  load_checkpoint(ckpt, *net, state, rng_state);
  return [net](const std::vector<double>& obs) {
    return argmax(net->forward(obs));
  };
}

std::vector<Cell> rollout_cell_sequence(const RunConfig& cfg,
                                        const GreedyPolicy& policy,
                                        std::uint64_t seed) {
  RunConfig single = cfg;
  single.env.n_agents = 1;
  GridEnv env(single.env);
  std::vector<Observation> obs = env.reset(seed);
  std::vector<Cell> cells = {env.agents()[0].cell};
  while (!env.done()) {
    const Action a = static_cast<Action>(policy(obs[0].data));
    StepResult res = env.step({a});
    cells.push_back(env.agents()[0].cell);
    obs = std::move(res.obs);
  }
  return cells;
}

}  // namespace hcov
