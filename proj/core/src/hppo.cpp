#include "hcov/hppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hcov {

void RolloutBuffer::clear() {
  lanes.clear();
  advantages.clear();
  value_targets.clear();
}

std::vector<double> curve_branch_distribution(const GridEnv& env, int agent) {
  std::vector<double> dist(kNumActions, 0.0);
  const AgentState& st = env.agents()[agent];
  const Action a = env.map().curve_action(st.cell.x, st.cell.y);
  if (a == Action::Stay || !env.move_blocked(st.cell, a)) {
    dist[static_cast<int>(a)] = 1.0;
    return dist;
  }
  const std::vector<Action> moves = env.valid_moves(st.cell);
  if (moves.empty()) {
    dist[static_cast<int>(Action::Stay)] = 1.0;
    return dist;
  }
  for (Action m : moves) dist[static_cast<int>(m)] = 1.0 / moves.size();
  return dist;
}

SampledAction ppo_sample_action(const MlpNet& policy,
                                std::span<const double> obs, double eps_bias,
                                std::span<const double> curve_dist,
                                std::mt19937_64& rng) {
  const std::vector<double> logits = policy.forward(obs);
  const std::vector<double> pi = softmax(logits);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  int action;
  if (u(rng) < eps_bias) {
    double r = u(rng), acc = 0.0;
    action = kNumActions - 1;
    for (int a = 0; a < kNumActions; ++a) {
      acc += curve_dist[a];
      if (r < acc) { action = a; break; }
    }
  } else {
    double r = u(rng), acc = 0.0;
    action = kNumActions - 1;
    for (int a = 0; a < kNumActions; ++a) {
      acc += pi[a];
      if (r < acc) { action = a; break; }
    }
  }

  SampledAction out;
  out.action = action;
  const double behavior =
      eps_bias * curve_dist[action] + (1.0 - eps_bias) * pi[action];
  out.logp_behavior = std::log(behavior);
  out.logp_policy = std::log(pi[action]);
  return out;
}

void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap_value,
                 double gamma, double lambda, std::vector<double>& advantages,
                 std::vector<double>& value_targets) {
  const std::size_t T = rewards.size();
  if (values.size() != T || dones.size() != T) {
    throw std::domain_error("compute_gae: length mismatch");
  }
  advantages.assign(T, 0.0);
  value_targets.assign(T, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t t = T; t-- > 0;) {
    const double nonterminal = dones[t] ? 0.0 : 1.0;
    const double delta =
        rewards[t] + gamma * next_value * nonterminal - values[t];
    next_adv = delta + gamma * lambda * nonterminal * next_adv;
    advantages[t] = next_adv;
    value_targets[t] = next_adv + values[t];
    next_value = values[t];
  }
}

double anneal(double eps_bias, double kappa, double eps_min) {
  return std::max(eps_min, kappa * eps_bias);
}

PpoStats ppo_update(const RolloutBuffer& buffer, MlpNet& policy,
                    AdamState& adam_pi, MlpNet& value, AdamState& adam_v,
                    const PpoConfig& cfg, std::mt19937_64& rng) {
  struct Ref {
    const RolloutStep* step;
    double adv;
    double target;
  };
  std::vector<Ref> samples;
  for (std::size_t lane = 0; lane < buffer.lanes.size(); ++lane) {
    if (buffer.advantages.size() <= lane ||
        buffer.advantages[lane].size() != buffer.lanes[lane].size()) {
      throw std::logic_error("ppo_update: advantages not computed");
    }
    for (std::size_t t = 0; t < buffer.lanes[lane].size(); ++t) {
      samples.push_back({&buffer.lanes[lane][t], buffer.advantages[lane][t],
                         buffer.value_targets[lane][t]});
    }
  }
  if (samples.empty()) throw std::logic_error("ppo_update: empty buffer");

  // Normalize advantages to zero mean, unit variance over the update.
  double mean = 0.0;
  for (const Ref& s : samples) mean += s.adv;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (const Ref& s : samples) var += (s.adv - mean) * (s.adv - mean);
  var /= static_cast<double>(samples.size());
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  for (Ref& s : samples) s.adv = (s.adv - mean) * inv_std;

  PpoStats stats;
  long n_obj = 0, n_clipped = 0;
  double sum_policy_loss = 0.0, sum_value_loss = 0.0, sum_kl = 0.0;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  ForwardCache cache;
  std::vector<double> dlogits(policy.output_size());
  std::vector<double> dv(1);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch));
      const double inv_mb = 1.0 / static_cast<double>(end - start);

      Gradients gpi = policy.zero_gradients();
      Gradients gv = value.zero_gradients();
      for (std::size_t k = start; k < end; ++k) {
        const Ref& s = samples[order[k]];
        const std::vector<double> logits = policy.forward(s.step->obs, cache);
        const std::vector<double> lp = log_softmax(logits);
        const std::vector<double> pi = softmax(logits);
        const double denom =
            cfg.mixture_ratio ? s.step->logp_behavior : s.step->logp_policy;
        const double ratio = std::exp(lp[s.step->action] - denom);
        if (!std::isfinite(ratio)) {
          ++stats.skipped;
          continue;
        }
        const double unclipped = ratio * s.adv;
        const double clipped =
            std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * s.adv;
        const double obj = std::min(unclipped, clipped);
        sum_policy_loss += -obj;
        sum_kl += denom - lp[s.step->action];
        if (std::abs(ratio - 1.0) > cfg.clip) ++n_clipped;
        ++n_obj;

        // d(-obj)/dlogits; zero when the clipped branch is active.
        const bool unclipped_active = unclipped <= clipped;
        for (int a = 0; a < kNumActions; ++a) {
          double g = 0.0;
          if (unclipped_active) {
            const double ind = a == s.step->action ? 1.0 : 0.0;
            g -= ratio * s.adv * (ind - pi[a]);
          }
          if (cfg.entropy_coef > 0.0) {
            double entropy = 0.0;
            for (int b = 0; b < kNumActions; ++b) entropy -= pi[b] * lp[b];
            g += cfg.entropy_coef * pi[a] * (lp[a] + entropy);
          }
          dlogits[a] = g * inv_mb;
        }
        backward_accumulate(policy, cache, dlogits, gpi);

        const std::vector<double> vout = value.forward(s.step->obs, cache);
        const double verr = vout[0] - s.target;
        sum_value_loss += verr * verr;
        dv[0] = 2.0 * verr * inv_mb;
        backward_accumulate(value, cache, dv, gv);
      }
      adam_step(policy, gpi, adam_pi, cfg.adam_pi);
      adam_step(value, gv, adam_v, cfg.adam_v);
    }
  }

  if (n_obj > 0) {
    stats.policy_loss = sum_policy_loss / n_obj;
    stats.value_loss = sum_value_loss / n_obj;
    stats.clip_fraction = static_cast<double>(n_clipped) / n_obj;
    stats.approx_kl = sum_kl / n_obj;
  }
  return stats;
}

}  // namespace hcov
