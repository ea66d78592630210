#include "hcov/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace hcov {

void Gradients::zero() {
  for (auto& g : dw) std::fill(g.begin(), g.end(), 0.0);
  for (auto& g : db) std::fill(g.begin(), g.end(), 0.0);
}

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    for (std::size_t i = 0; i < dw[l].size(); ++i) dw[l][i] += other.dw[l][i];
    for (std::size_t i = 0; i < db[l].size(); ++i) db[l][i] += other.db[l][i];
  }
}

void Gradients::scale(double s) {
  for (auto& g : dw)
    for (double& v : g) v *= s;
  for (auto& g : db)
    for (double& v : g) v *= s;
}

MlpNet::MlpNet(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("MlpNet: need at least input and output sizes");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.w.resize(layer.in * layer.out);
    layer.b.assign(layer.out, 0.0);
    for (double& w : layer.w) w = dist(rng);
    layers_.push_back(std::move(layer));
  }
}

std::vector<std::size_t> MlpNet::sizes() const {
  std::vector<std::size_t> s;
  if (layers_.empty()) return s;
  s.push_back(layers_.front().in);
  for (const DenseLayer& l : layers_) s.push_back(l.out);
  return s;
}

std::vector<double> MlpNet::forward(std::span<const double> x) const {
  ForwardCache cache;
  return forward(x, cache);
}

std::vector<double> MlpNet::forward(std::span<const double> x,
                                    ForwardCache& cache) const {
  if (x.size() != input_size()) {
    throw std::domain_error("MlpNet: input size mismatch");
  }
  cache.act.clear();
  cache.act.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    const std::vector<double>& in = cache.act.back();
    std::vector<double> out(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* wrow = layer.w.data() + o * layer.in;
      double acc = layer.b[o];
      for (std::size_t i = 0; i < layer.in; ++i) acc += wrow[i] * in[i];
      out[o] = acc;
    }
    if (l + 1 < layers_.size()) {
      for (double& v : out) v = v > 0.0 ? v : 0.0;  // ReLU on hidden layers
    }
    cache.act.push_back(std::move(out));
  }
  return cache.act.back();
}

Gradients MlpNet::zero_gradients() const {
  Gradients g;
  for (const DenseLayer& l : layers_) {
    g.dw.emplace_back(l.w.size(), 0.0);
    g.db.emplace_back(l.b.size(), 0.0);
  }
  return g;
}

void backward_accumulate(const MlpNet& net, const ForwardCache& cache,
                         std::span<const double> dout, Gradients& grads) {
  const auto& layers = net.layers();
  if (cache.act.size() != layers.size() + 1 ||
      dout.size() != net.output_size()) {
    throw std::logic_error("backward: cache does not match network");
  }
  std::vector<double> delta(dout.begin(), dout.end());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    const std::vector<double>& in = cache.act[l];
    // ReLU mask on hidden outputs; post-activation > 0 iff preactivation > 0.
    if (l + 1 < layers.size()) {
      const std::vector<double>& out = cache.act[l + 1];
      for (std::size_t o = 0; o < layer.out; ++o) {
        if (out[o] <= 0.0) delta[o] = 0.0;
      }
    }
    double* dw = grads.dw[l].data();
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      grads.db[l][o] += d;
      double* row = dw + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) row[i] += d * in[i];
    }
    if (l > 0) {
      std::vector<double> prev(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        const double* wrow = layer.w.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) prev[i] += d * wrow[i];
      }
      delta = std::move(prev);
    }
  }
}

Gradients backward(const MlpNet& net, const ForwardCache& cache,
                   std::span<const double> dout) {
  Gradients g = net.zero_gradients();
  backward_accumulate(net, cache, dout, g);
  return g;
}

AdamState make_adam_state(const MlpNet& net) {
  AdamState s;
  for (const DenseLayer& l : net.layers()) {
    s.m.emplace_back(l.w.size(), 0.0);
    s.m.emplace_back(l.b.size(), 0.0);
    s.v.emplace_back(l.w.size(), 0.0);
    s.v.emplace_back(l.b.size(), 0.0);
  }
  return s;
}

namespace {

void adam_update_block(std::span<double> params, std::span<const double> grads,
                       std::vector<double>& m, std::vector<double>& v,
                       const AdamConfig& cfg, double bc1, double bc2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

}  // namespace

void adam_step(MlpNet& net, const Gradients& grads, AdamState& state,
               const AdamConfig& cfg) {
  for (const auto& block : grads.dw)
    for (double g : block)
      if (!std::isfinite(g))
        throw std::runtime_error("adam_step: non-finite gradient");
  for (const auto& block : grads.db)
    for (double g : block)
      if (!std::isfinite(g))
        throw std::runtime_error("adam_step: non-finite gradient");

  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    adam_update_block(layers[l].w, grads.dw[l], state.m[2 * l], state.v[2 * l],
                      cfg, bc1, bc2);
    adam_update_block(layers[l].b, grads.db[l], state.m[2 * l + 1],
                      state.v[2 * l + 1], cfg, bc1, bc2);
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(logits.begin(), logits.end());
  for (double& v : out) v -= lse;
  return out;
}

int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

namespace {
constexpr const char* kMagic = "HCOVNET";
constexpr int kVersion = 1;

void write_block(std::ostream& out, const std::vector<double>& block) {
  out << block.size();
  out.precision(17);
  for (double v : block) out << ' ' << v;
  out << '\n';
}

std::vector<double> read_block(std::istream& in) {
  std::size_t n = 0;
  in >> n;
  std::vector<double> block(n);
  for (double& v : block) in >> v;
  return block;
}
}  // namespace

void save_checkpoint(const MlpNet& net, const AdamState& state,
                     const std::string& rng_state,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for write: " + path.string());
  out << kMagic << ' ' << kVersion << '\n';
  const auto sizes = net.sizes();
  out << sizes.size();
  for (std::size_t s : sizes) out << ' ' << s;
  out << '\n';
  for (const DenseLayer& l : net.layers()) {
    write_block(out, l.w);
    write_block(out, l.b);
  }
  out << state.step << '\n';
  for (const auto& m : state.m) write_block(out, m);
  for (const auto& v : state.v) write_block(out, v);
  out << "rng " << rng_state << '\n';
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, MlpNet& net,
                     AdamState& state, std::string& rng_state) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kMagic || version != kVersion) {
    throw std::runtime_error("bad checkpoint header: " + path.string());
  }
  std::size_t nsizes = 0;
  in >> nsizes;
  std::vector<std::size_t> sizes(nsizes);
  for (std::size_t& s : sizes) in >> s;
  if (nsizes < 2) throw std::runtime_error("bad checkpoint sizes: " + path.string());
  net = MlpNet(sizes, 0);
  for (DenseLayer& l : net.layers()) {
    l.w = read_block(in);
    l.b = read_block(in);
    if (l.w.size() != l.in * l.out || l.b.size() != l.out) {
      throw std::runtime_error("checkpoint parameter shape mismatch: " +
                               path.string());
    }
  }
  in >> state.step;
  state.m.clear();
  state.v.clear();
  for (std::size_t i = 0; i < 2 * net.layers().size(); ++i) {
    state.m.push_back(read_block(in));
  }
  for (std::size_t i = 0; i < 2 * net.layers().size(); ++i) {
    state.v.push_back(read_block(in));
  }
  std::string tag;
  in >> tag;
  std::getline(in, rng_state);
  if (!in || tag != "rng") {
    throw std::runtime_error("truncated checkpoint: " + path.string());
  }
  if (!rng_state.empty() && rng_state.front() == ' ') rng_state.erase(0, 1);
}

}  // namespace hcov
