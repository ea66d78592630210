#include "hcov/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hcov {

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected boolean, got '" + v + "'");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& v) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    seeds.push_back(std::stoull(tok));
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if (seeds[i] == seeds[j]) {
        throw std::invalid_argument("duplicate seed " + std::to_string(seeds[i]));
      }
    }
  }
  return seeds;
}

void flatten_json(const nlohmann::json& j, const std::string& prefix,
                  std::map<std::string, std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten_json(value, full, out);
    } else if (value.is_string()) {
      out[full] = value.get<std::string>();
    } else {
      out[full] = value.dump();
    }
  }
}

}  // namespace

void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  try {
    if (key == "algo") {
      if (value != "dqn" && value != "hdqn" && value != "ppo" && value != "hppo") {
        throw std::invalid_argument("unknown algo '" + value + "'");
      }
      cfg.algo = value;
    } else if (key == "seeds") {
      cfg.seeds = parse_seed_list(value);
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "map") {
      cfg.map_file = value;
    } else if (key == "env.width") {
      cfg.env.width = std::stoi(value);
    } else if (key == "env.height") {
      cfg.env.height = std::stoi(value);
    } else if (key == "env.n_agents") {
      cfg.env.n_agents = std::stoi(value);
    } else if (key == "env.n_targets") {
      cfg.env.n_targets = std::stoi(value);
    } else if (key == "env.horizon") {
      cfg.env.horizon = std::stoi(value);
    } else if (key == "env.obs_radius") {
      cfg.env.obs_radius = std::stoi(value);
    } else if (key == "env.cell_size_m") {
      cfg.env.cell_size_m = std::stod(value);
    } else if (key == "env.hilbert_obs") {
      cfg.env.hilbert_obs = parse_bool(value);
    } else if (key == "shaping.mode") {
      cfg.env.shaping.mode = shaping_mode_from_string(value);
    } else if (key == "shaping.alpha") {
      cfg.env.shaping.alpha = std::stod(value);
    } else if (key == "shaping.r_h") {
      cfg.env.shaping.r_h = std::stod(value);
    } else if (key == "train.total_steps") {
      cfg.total_steps = std::stol(value);
    } else if (key == "train.eval_every") {
      cfg.eval_every = std::stol(value);
    } else if (key == "train.eval_episodes") {
      cfg.eval_episodes = std::stoi(value);
    } else if (key == "dqn.gamma") {
      cfg.dqn.gamma = std::stod(value);
    } else if (key == "dqn.batch") {
      cfg.dqn.batch = std::stoi(value);
    } else if (key == "dqn.target_sync_every") {
      cfg.dqn.target_sync_every = std::stoi(value);
    } else if (key == "dqn.eps_start") {
      cfg.dqn.eps_start = std::stod(value);
    } else if (key == "dqn.eps_end") {
      cfg.dqn.eps_end = std::stod(value);
    } else if (key == "dqn.replay_capacity") {
      cfg.dqn.replay_capacity = std::stoul(value);
    } else if (key == "dqn.lr") {
      cfg.dqn.adam.lr = std::stod(value);
    } else if (key == "dqn.curve_exploration") {
      cfg.dqn.curve_exploration = parse_bool(value);
    } else if (key == "ppo.gamma") {
      cfg.ppo.gamma = std::stod(value);
    } else if (key == "ppo.gae_lambda") {
      cfg.ppo.gae_lambda = std::stod(value);
    } else if (key == "ppo.clip") {
      cfg.ppo.clip = std::stod(value);
    } else if (key == "ppo.bias_start") {
      cfg.ppo.bias_start = std::stod(value);
    } else if (key == "ppo.bias_min") {
      cfg.ppo.bias_min = std::stod(value);
    } else if (key == "ppo.kappa") {
      cfg.ppo.kappa = std::stod(value);
    } else if (key == "ppo.epochs") {
      cfg.ppo.epochs = std::stoi(value);
    } else if (key == "ppo.minibatch") {
      cfg.ppo.minibatch = std::stoi(value);
    } else if (key == "ppo.horizon") {
      cfg.ppo.horizon = std::stoi(value);
    } else if (key == "ppo.lr_pi") {
      cfg.ppo.adam_pi.lr = std::stod(value);
    } else if (key == "ppo.lr_v") {
      cfg.ppo.adam_v.lr = std::stod(value);
    } else if (key == "ppo.curve_bias") {
      cfg.ppo.curve_bias = parse_bool(value);
    } else if (key == "ppo.mixture_ratio") {
      cfg.ppo.mixture_ratio = parse_bool(value);
    } else if (key == "ppo.entropy_coef") {
      cfg.ppo.entropy_coef = std::stod(value);
    } else if (key == "conv.window") {
      cfg.convergence.window = std::stoi(value);
    } else if (key == "conv.threshold") {
      cfg.convergence.threshold = std::stod(value);
    } else if (key == "conv.consecutive") {
      cfg.convergence.consecutive = std::stoi(value);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument("bad value for '" + key + "': " + e.what());
  }
}

void apply_algo_preset(RunConfig& cfg) {
  const bool hilbert = cfg.algo == "hdqn" || cfg.algo == "hppo";
  cfg.env.hilbert_obs = hilbert;
  cfg.dqn.curve_exploration = hilbert;
  cfg.ppo.curve_bias = hilbert;
  // Potential shaping pairs with the value-based learner; the PPO variant
  // keeps the surrogate objective untouched and relies on the augmented
  // state plus curve-biased sampling. Shaping remains available by key.
  cfg.env.shaping.mode =
      cfg.algo == "hdqn" ? ShapingMode::Potential : ShapingMode::None;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config file not found: " + path.string());
  }

  std::map<std::string, std::string> kv;
  std::string first;
  std::getline(in, first);
  in.seekg(0);
  const auto nonspace = first.find_first_not_of(" \t\r");
  const bool is_json = path.extension() == ".json" ||
                       (nonspace != std::string::npos && first[nonspace] == '{');
  if (is_json) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw std::invalid_argument("bad JSON config: " + std::string(e.what()));
    }
    flatten_json(j, "", kv);
  } else {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (eq == std::string::npos) {
        throw std::invalid_argument(path.string() + ":" +
                                    std::to_string(lineno) + ": expected key=value");
      }
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  RunConfig cfg;
  if (auto it = kv.find("algo"); it != kv.end()) {
    apply_config_key(cfg, it->first, it->second);
    kv.erase(it);
  }
  apply_algo_preset(cfg);
  for (const auto& [key, value] : kv) {
    apply_config_key(cfg, key, value);
  }

  if (!cfg.map_file.empty()) {
    std::filesystem::path map_path(cfg.map_file);
    if (map_path.is_relative()) {
      map_path = path.parent_path() / map_path;
    }
    if (!std::filesystem::exists(map_path)) {
      throw std::invalid_argument("map file not found: " + map_path.string());
    }
    apply_map_file(cfg.env, map_path.string());
  }

  // The learner's discount is the one shaping sees.
  cfg.env.shaping.gamma = cfg.is_ppo_family() ? cfg.ppo.gamma : cfg.dqn.gamma;
  return cfg;
}

void write_resolved_config(const RunConfig& cfg,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write config: " + path.string());
  }
  out.precision(17);
  out << "algo = " << cfg.algo << '\n';
  out << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    out << (i ? "," : "") << cfg.seeds[i];
  }
  out << '\n';
  if (!cfg.map_file.empty()) out << "map = " << cfg.map_file << '\n';
  out << "env.width = " << cfg.env.width << '\n'
      << "env.height = " << cfg.env.height << '\n'
      << "env.n_agents = " << cfg.env.n_agents << '\n'
      << "env.n_targets = " << cfg.env.n_targets << '\n'
      << "env.horizon = " << cfg.env.horizon << '\n'
      << "env.obs_radius = " << cfg.env.obs_radius << '\n'
      << "env.cell_size_m = " << cfg.env.cell_size_m << '\n'
      << "env.hilbert_obs = " << (cfg.env.hilbert_obs ? "true" : "false") << '\n'
      << "shaping.mode = " << to_string(cfg.env.shaping.mode) << '\n'
      << "shaping.alpha = " << cfg.env.shaping.alpha << '\n'
      << "shaping.r_h = " << cfg.env.shaping.r_h << '\n'
      << "train.total_steps = " << cfg.total_steps << '\n'
      << "train.eval_every = " << cfg.eval_every << '\n'
      << "train.eval_episodes = " << cfg.eval_episodes << '\n'
      << "dqn.gamma = " << cfg.dqn.gamma << '\n'
      << "dqn.batch = " << cfg.dqn.batch << '\n'
      << "dqn.target_sync_every = " << cfg.dqn.target_sync_every << '\n'
      << "dqn.eps_start = " << cfg.dqn.eps_start << '\n'
      << "dqn.eps_end = " << cfg.dqn.eps_end << '\n'
      << "dqn.replay_capacity = " << cfg.dqn.replay_capacity << '\n'
      << "dqn.lr = " << cfg.dqn.adam.lr << '\n'
      << "dqn.curve_exploration = "
      << (cfg.dqn.curve_exploration ? "true" : "false") << '\n'
      << "ppo.gamma = " << cfg.ppo.gamma << '\n'
      << "ppo.gae_lambda = " << cfg.ppo.gae_lambda << '\n'
      << "ppo.clip = " << cfg.ppo.clip << '\n'
      << "ppo.bias_start = " << cfg.ppo.bias_start << '\n'
      << "ppo.bias_min = " << cfg.ppo.bias_min << '\n'
      << "ppo.kappa = " << cfg.ppo.kappa << '\n'
      << "ppo.epochs = " << cfg.ppo.epochs << '\n'
      << "ppo.minibatch = " << cfg.ppo.minibatch << '\n'
      << "ppo.horizon = " << cfg.ppo.horizon << '\n'
      << "ppo.lr_pi = " << cfg.ppo.adam_pi.lr << '\n'
      << "ppo.lr_v = " << cfg.ppo.adam_v.lr << '\n'
      << "ppo.curve_bias = " << (cfg.ppo.curve_bias ? "true" : "false") << '\n'
      << "ppo.mixture_ratio = " << (cfg.ppo.mixture_ratio ? "true" : "false")
      << '\n'
      << "ppo.entropy_coef = " << cfg.ppo.entropy_coef << '\n'
      << "conv.window = " << cfg.convergence.window << '\n'
      << "conv.threshold = " << cfg.convergence.threshold << '\n'
      << "conv.consecutive = " << cfg.convergence.consecutive << '\n';
}

}  // namespace hcov
