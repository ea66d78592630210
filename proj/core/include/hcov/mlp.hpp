#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hcov {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct DenseLayer {
  std::size_t in = 0, out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
};

struct ForwardCache {
  // act[0] is the input, act[i] the post-activation output of layer i.
  std::vector<std::vector<double>> act;
};

struct Gradients {
  std::vector<std::vector<double>> dw, db;
  void zero();
  void add(const Gradients& other);
  void scale(double s);
};

/// Dense feed-forward net: ReLU on hidden layers, linear output.
/// Double precision throughout; deterministic given the init seed.
class MlpNet {
 public:
  MlpNet() = default;
  /// sizes = {input, hidden..., output}; uniform fan-in init.
  MlpNet(const std::vector<std::size_t>& sizes, std::uint64_t seed);

  std::size_t input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t output_size() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  std::vector<std::size_t> sizes() const;

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const double> x, ForwardCache& cache) const;

  Gradients zero_gradients() const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Exact gradients of a scalar loss w.r.t. all parameters, given the
/// upstream gradient dL/d(output). Throws std::logic_error on a cache that
/// does not match the net.
Gradients backward(const MlpNet& net, const ForwardCache& cache,
                   std::span<const double> dout);
void backward_accumulate(const MlpNet& net, const ForwardCache& cache,
                         std::span<const double> dout, Gradients& grads);

struct AdamState {
  std::vector<std::vector<double>> m, v;  // dw then db blocks, matching Gradients
  std::uint64_t step = 0;
};

AdamState make_adam_state(const MlpNet& net);

/// Bias-corrected Adam update. Throws std::runtime_error on non-finite
/// gradients (the step is not applied).
void adam_step(MlpNet& net, const Gradients& grads, AdamState& state,
               const AdamConfig& cfg);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
int argmax(std::span<const double> v);  // lowest index wins ties

/// Plain-text checkpoint: layer sizes, parameters, Adam state, RNG state.
void save_checkpoint(const MlpNet& net, const AdamState& state,
                     const std::string& rng_state,
                     const std::filesystem::path& path);
void load_checkpoint(const std::filesystem::path& path, MlpNet& net,
                     AdamState& state, std::string& rng_state);

}  // namespace hcov
