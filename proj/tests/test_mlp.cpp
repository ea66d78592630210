#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "hcov/mlp.hpp"

using namespace hcov;

namespace {

std::vector<double> random_input(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(rng);
  return x;
}

// Scalar losses used to exercise backward() through different heads.
double loss_sum(const std::vector<double>& out) {
  double s = 0.0;
  for (double v : out) s += v;
  return s;
}
double loss_sq(const std::vector<double>& out) {
  double s = 0.0;
  for (double v : out) s += v * v;
  return s;
}
double loss_nll(const std::vector<double>& out, int a) {
  return -log_softmax(out)[a];
}

double numeric_grad(MlpNet& net, const std::vector<double>& x,
                    std::size_t layer, bool bias, std::size_t idx,
                    const std::function<double(const std::vector<double>&)>& f) {
  const double h = 1e-6;
  double& p = bias ? net.layers()[layer].b[idx] : net.layers()[layer].w[idx];
  const double saved = p;
  p = saved + h;
  const double up = f(net.forward(x));
  p = saved - h;
  const double down = f(net.forward(x));
  p = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("construction and deterministic init") {
  MlpNet net({7, 16, 16, 5}, 123);
  CHECK(net.input_size() == 7);
  CHECK(net.output_size() == 5);
  CHECK(net.sizes() == std::vector<std::size_t>{7, 16, 16, 5});
  REQUIRE(net.layers().size() == 3);
  CHECK(net.layers()[0].w.size() == 16 * 7);
  CHECK(net.layers()[2].b.size() == 5);

  MlpNet net2({7, 16, 16, 5}, 123);
  CHECK(net.layers()[1].w == net2.layers()[1].w);
  MlpNet net3({7, 16, 16, 5}, 124);
  CHECK(net.layers()[1].w != net3.layers()[1].w);

  // Uniform fan-in init stays within 1/sqrt(fan_in).
  const double bound = 1.0 / std::sqrt(7.0);
  for (double w : net.layers()[0].w) {
    CHECK(std::abs(w) <= bound + 1e-12);
  }
}

TEST_CASE("forward matches a hand-computed tiny net") {
  MlpNet net({2, 2, 1}, 0);
  net.layers()[0].w = {1.0, -1.0, 0.5, 0.5};
  net.layers()[0].b = {0.0, -1.0};
  net.layers()[1].w = {2.0, 3.0};
  net.layers()[1].b = {0.25};
  // x = (1, 2): pre = (1-2, 0.5+1-1) = (-1, 0.5) -> relu (0, 0.5)
  // out = 2*0 + 3*0.5 + 0.25 = 1.75
  const auto out = net.forward(std::vector<double>{1.0, 2.0});
  REQUIRE(out.size() == 1);
  CHECK(out[0] == doctest::Approx(1.75));

  ForwardCache cache;
  const auto out2 = net.forward(std::vector<double>{1.0, 2.0}, cache);
  CHECK(out2 == out);
  REQUIRE(cache.act.size() == 3);
  CHECK(cache.act[0] == std::vector<double>{1.0, 2.0});
  CHECK(cache.act[1] == std::vector<double>{0.0, 0.5});
}

TEST_CASE("backward agrees with central differences") {
  std::mt19937_64 rng(77);
  MlpNet net({6, 10, 8, 4}, 9001);
  const auto x = random_input(6, rng);

  struct Head {
    std::function<double(const std::vector<double>&)> loss;
    std::function<std::vector<double>(const std::vector<double>&)> dout;
  };
  std::vector<Head> heads;
  heads.push_back({loss_sum, [](const std::vector<double>& o) {
                     return std::vector<double>(o.size(), 1.0);
                   }});
  heads.push_back({loss_sq, [](const std::vector<double>& o) {
                     std::vector<double> d(o.size());
                     for (std::size_t i = 0; i < o.size(); ++i) d[i] = 2.0 * o[i];
                     return d;
                   }});
  const int act = 2;
  heads.push_back({[&](const std::vector<double>& o) { return loss_nll(o, act); },
                   [&](const std::vector<double>& o) {
                     auto p = softmax(o);
                     p[act] -= 1.0;
                     return p;
                   }});

  for (const Head& head : heads) {
    ForwardCache cache;
    const auto out = net.forward(x, cache);
    const Gradients g = backward(net, cache, head.dout(out));

    std::uniform_int_distribution<std::size_t> layer_dist(0, 2);
    for (int probe = 0; probe < 40; ++probe) {
      const std::size_t l = layer_dist(rng);
      const bool bias = probe % 4 == 0;
      const auto& vec = bias ? g.db[l] : g.dw[l];
      std::uniform_int_distribution<std::size_t> idx_dist(0, vec.size() - 1);
      const std::size_t i = idx_dist(rng);
      const double num = numeric_grad(net, x, l, bias, i, head.loss);
      CHECK(vec[i] == doctest::Approx(num).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("backward_accumulate sums per-sample gradients") {
  std::mt19937_64 rng(3);
  MlpNet net({4, 6, 3}, 55);
  Gradients acc = net.zero_gradients();
  Gradients manual = net.zero_gradients();
  for (int i = 0; i < 5; ++i) {
    const auto x = random_input(4, rng);
    ForwardCache cache;
    const auto out = net.forward(x, cache);
    std::vector<double> dout(out.size(), 1.0);
    backward_accumulate(net, cache, dout, acc);
    manual.add(backward(net, cache, dout));
  }
  for (std::size_t l = 0; l < acc.dw.size(); ++l) {
    for (std::size_t i = 0; i < acc.dw[l].size(); ++i) {
      CHECK(acc.dw[l][i] == doctest::Approx(manual.dw[l][i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradients scale and zero") {
  MlpNet net({3, 4, 2}, 1);
  std::mt19937_64 rng(8);
  const auto x = random_input(3, rng);
  ForwardCache cache;
  const auto out = net.forward(x, cache);
  Gradients g = backward(net, cache, std::vector<double>(out.size(), 1.0));
  Gradients g2 = g;
  g2.scale(0.5);
  CHECK(g2.dw[0][0] == doctest::Approx(0.5 * g.dw[0][0]));
  g2.zero();
  for (const auto& blk : g2.dw) {
    for (double v : blk) CHECK(v == 0.0);
  }
}

TEST_CASE("adam first step moves each parameter by ~lr") {
  // With zero state, m_hat/(sqrt(v_hat)+eps) ~= sign(g), so the first
  // update is close to lr in magnitude for any nonzero gradient.
  MlpNet net({2, 3, 1}, 42);
  const MlpNet before = net;
  AdamState state = make_adam_state(net);
  Gradients g = net.zero_gradients();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(0.5, 2.0);
  for (auto& blk : g.dw) {
    for (auto& v : blk) v = dist(rng) * (rng() % 2 ? 1.0 : -1.0);
  }
  for (auto& blk : g.db) {
    for (auto& v : blk) v = dist(rng) * (rng() % 2 ? 1.0 : -1.0);
  }
  AdamConfig cfg;
  cfg.lr = 1e-3;
  adam_step(net, g, state, cfg);
  CHECK(state.step == 1);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    for (std::size_t i = 0; i < net.layers()[l].w.size(); ++i) {
      const double delta = net.layers()[l].w[i] - before.layers()[l].w[i];
      CHECK(std::abs(delta) == doctest::Approx(cfg.lr).epsilon(1e-4));
      CHECK(delta * g.dw[l][i] < 0.0);  // moves against the gradient
    }
  }
}

TEST_CASE("adam rejects non-finite gradients") {
  MlpNet net({2, 3, 1}, 42);
  const MlpNet before = net;
  AdamState state = make_adam_state(net);
  Gradients g = net.zero_gradients();
  g.dw[0][0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(net, g, state, AdamConfig{}), std::runtime_error);
  CHECK(state.step == 0);
  CHECK(net.layers()[0].w == before.layers()[0].w);
}

TEST_CASE("adam descends a quadratic") {
  MlpNet net({3, 8, 1}, 6);
  AdamState state = make_adam_state(net);
  AdamConfig cfg;
  cfg.lr = 1e-2;
  const std::vector<double> x = {0.3, -0.7, 0.5};
  const double target = 2.0;
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 200; ++it) {
    ForwardCache cache;
    const auto out = net.forward(x, cache);
    const double err = out[0] - target;
    if (it == 0) first = err * err;
    last = err * err;
    const Gradients g = backward(net, cache, std::vector<double>{2.0 * err});
    adam_step(net, g, state, cfg);
  }
  CHECK(last < first * 0.01);
}

TEST_CASE("softmax invariants") {
  const std::vector<double> logits = {1.0, 2.0, 3.0, -1.0};
  const auto p = softmax(logits);
  double sum = 0.0;
  for (double v : p) {
    CHECK(v > 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  // Shift invariance and agreement with log_softmax.
  std::vector<double> shifted = logits;
  for (auto& v : shifted) v += 500.0;
  const auto p2 = softmax(shifted);
  const auto lp = log_softmax(logits);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p2[i] == doctest::Approx(p[i]).epsilon(1e-12));
    CHECK(std::exp(lp[i]) == doctest::Approx(p[i]).epsilon(1e-12));
  }

  // Extreme logits stay finite.
  const auto pex = softmax(std::vector<double>{1000.0, -1000.0});
  CHECK(pex[0] == doctest::Approx(1.0));
  CHECK(std::isfinite(log_softmax(std::vector<double>{1000.0, -1000.0})[1]));

  CHECK(argmax(std::vector<double>{0.0, 3.0, 3.0, 1.0}) == 1);
  CHECK(argmax(std::vector<double>{-5.0}) == 0);
}

TEST_CASE("checkpoint roundtrip is exact") {
  MlpNet net({5, 12, 4}, 77);
  AdamState state = make_adam_state(net);
  // Push a few updates so the Adam moments are nontrivial.
  std::mt19937_64 rng(13);
  for (int it = 0; it < 3; ++it) {
    const auto x = random_input(5, rng);
    ForwardCache cache;
    const auto out = net.forward(x, cache);
    const Gradients g = backward(net, cache, std::vector<double>(out.size(), 0.3));
    adam_step(net, g, state, AdamConfig{});
  }
  const std::string rng_state = "12345 67890";
  const char* path = "ckpt_roundtrip.tmp";
  save_checkpoint(net, state, rng_state, path);

  MlpNet loaded;
  AdamState lstate;
  std::string lrng;
  load_checkpoint(path, loaded, lstate, lrng);
  std::remove(path);

  CHECK(lrng == rng_state);
  CHECK(lstate.step == state.step);
  REQUIRE(loaded.sizes() == net.sizes());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    CHECK(loaded.layers()[l].w == net.layers()[l].w);
    CHECK(loaded.layers()[l].b == net.layers()[l].b);
  }
  for (std::size_t i = 0; i < state.m.size(); ++i) {
    CHECK(lstate.m[i] == state.m[i]);
    CHECK(lstate.v[i] == state.v[i]);
  }

  CHECK_THROWS_AS(load_checkpoint("no_such_checkpoint", loaded, lstate, lrng),
                  std::runtime_error);
}
