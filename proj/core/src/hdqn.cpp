#include "hcov/hdqn.hpp"

#include <algorithm>
#include <stdexcept>

namespace hcov {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch,
                                                    std::mt19937_64& rng) const {
  if (batch > data_.size()) {
    throw std::logic_error("ReplayBuffer: sample larger than buffer");
  }
  std::uniform_int_distribution<std::size_t> dist(0, data_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(&data_[dist(rng)]);
  return out;
}

double epsilon_at(const DqnConfig& cfg, long step, long total_steps) {
  if (total_steps <= 0) return cfg.eps_end;
  const double frac =
      std::clamp(static_cast<double>(step) / static_cast<double>(total_steps),
                 0.0, 1.0);
  return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
}

Action dqn_select_action(const MlpNet& qnet, const Observation& obs, double eps,
                         Action explore_action, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < eps) return explore_action;
  const std::vector<double> q = qnet.forward(obs.data);
  return static_cast<Action>(argmax(q));
}

Action guided_action(const GridEnv& env, int agent, std::mt19937_64& rng) {
  const AgentState& st = env.agents()[agent];
  const Action a = env.map().curve_action(st.cell.x, st.cell.y);
  if (a == Action::Stay || !env.move_blocked(st.cell, a)) return a;
  const std::vector<Action> moves = env.valid_moves(st.cell);
  if (moves.empty()) return Action::Stay;
  std::uniform_int_distribution<std::size_t> dist(0, moves.size() - 1);
  return moves[dist(rng)];
}

double td_target(double reward, const MlpNet& target_net,
                 const Observation& next_obs, bool done, double gamma) {
  if (done) return reward;
  const std::vector<double> q = target_net.forward(next_obs.data);
  return reward + gamma * *std::max_element(q.begin(), q.end());
}

std::optional<double> dqn_train_step(const ReplayBuffer& buffer, MlpNet& qnet,
                                     const MlpNet& target_net, AdamState& adam,
                                     const DqnConfig& cfg,
                                     std::mt19937_64& rng) {
  if (buffer.size() < static_cast<std::size_t>(cfg.batch)) return std::nullopt;
  const auto batch = buffer.sample(cfg.batch, rng);

  Gradients grads = qnet.zero_gradients();
  double loss = 0.0;
  ForwardCache cache;
  std::vector<double> dout(qnet.output_size());
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (const Transition* t : batch) {
    const double y =
        td_target(t->reward, target_net, Observation{t->next_obs}, t->done,
                  cfg.gamma);
    const std::vector<double> q = qnet.forward(t->obs, cache);
    const double err = q[t->action] - y;
    loss += err * err * inv_batch;
    std::fill(dout.begin(), dout.end(), 0.0);
    dout[t->action] = 2.0 * err * inv_batch;
    backward_accumulate(qnet, cache, dout, grads);
  }
  adam_step(qnet, grads, adam, cfg.adam);
  return loss;
}

}  // namespace hcov
