#include "hcov/eval_metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hcov {

std::optional<std::size_t> detect_convergence(
    std::span<const double> episode_rewards, const ConvergenceConfig& cfg) {
  if (episode_rewards.empty()) return std::nullopt;
  const std::size_t w = static_cast<std::size_t>(cfg.window);
  if (episode_rewards.size() < w) return std::nullopt;

  double running_max = -std::numeric_limits<double>::infinity();
  int streak = 0;
  double window_sum = 0.0;
  for (std::size_t i = 0; i < episode_rewards.size(); ++i) {
    window_sum += episode_rewards[i];
    if (i >= w) window_sum -= episode_rewards[i - w];
    if (i + 1 < w) continue;
    const double rolling = window_sum / static_cast<double>(w);
    running_max = std::max(running_max, rolling);
    if (rolling >= cfg.threshold * running_max) {
      if (++streak >= cfg.consecutive) return i;
    } else {
      streak = 0;
    }
  }
  return std::nullopt;
}

SeedAggregate aggregate_seeds(std::span<const double> values,
                              double confidence) {
  if (values.size() < 2) {
    throw std::invalid_argument("aggregate_seeds: need at least 2 values");
  }
  SeedAggregate out;
  out.n = static_cast<int>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= out.n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (out.n - 1));
  const boost::math::students_t dist(out.n - 1);
  const double tq = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  out.mean = mean;
  out.half_width = tq * sd / std::sqrt(static_cast<double>(out.n));
  return out;
}

SeedAggregate aggregate_seeds(const std::vector<std::optional<double>>& values,
                              double confidence) {
  std::vector<double> finite;
  int censored = 0;
  for (const auto& v : values) {
    if (v.has_value()) {
      finite.push_back(*v);
    } else {
      ++censored;
    }
  }
  SeedAggregate out = aggregate_seeds(std::span<const double>(finite), confidence);
  out.censored = censored;
  return out;
}

void write_eval_csv(const std::filesystem::path& path,
                    const std::string& run_id, const std::string& algo,
                    int n_agents, std::uint64_t seed,
                    std::span<const EvalRecord> records) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write eval csv: " + path.string());
  }
  out << "run_id,algo,n_agents,seed,step,reward,coverage,redundancy\n";
  char buf[160];
  for (const EvalRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%llu,%ld,%.6f,%.6f,%.6f\n",
                  run_id.c_str(), algo.c_str(), n_agents,
                  static_cast<unsigned long long>(seed), r.step, r.reward,
                  r.coverage, r.redundancy);
    out << buf;
  }
}

std::vector<EvalRecord> read_eval_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read eval csv: " + path.string());
  }
  std::vector<EvalRecord> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    EvalRecord r;
    for (int i = 0; std::getline(ss, field, ','); ++i) {
      switch (i) {
        case 4: r.step = std::stol(field); break;
        case 5: r.reward = std::stod(field); break;
        case 6: r.coverage = std::stod(field); break;
        case 7: r.redundancy = std::stod(field); break;
        default: break;
      }
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace hcov
