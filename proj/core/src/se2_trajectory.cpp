#include "hcov/se2_trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace hcov {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

bool near(double a, double b, double tol = 1e-9) { return std::abs(a - b) < tol; }

double heading(const Vec2& a, const Vec2& b) {
  return std::atan2(b.y - a.y, b.x - a.x);
}

double dist(const Vec2& a, const Vec2& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}
}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

WaypointPath cells_to_waypoints(std::span<const Cell> cells, double cell_size,
                                bool insert_corners) {
  if (cells.empty()) {
    throw std::domain_error("cells_to_waypoints: empty cell ordering");
  }
  if (cell_size <= 0.0) {
    throw std::domain_error("cells_to_waypoints: cell_size must be positive");
  }
  WaypointPath path;
  for (const Cell& c : cells) {
    const Vec2 p{cell_size * (c.x + 0.5), cell_size * (c.y + 0.5)};
    if (!path.pts.empty() && near(path.pts.back().x, p.x) &&
        near(path.pts.back().y, p.y)) {
      continue;
    }
    if (insert_corners && !path.pts.empty()) {
      const Vec2& prev = path.pts.back();
      if (!near(prev.x, p.x) && !near(prev.y, p.y)) {
        path.pts.push_back({p.x, prev.y});  // x-then-y corner convention
      }
    }
    path.pts.push_back(p);
  }
  return path;
}

WaypointPath resample_by_arc_length(const WaypointPath& path, double ds) {
  if (ds <= 0.0) {
    throw std::domain_error("resample_by_arc_length: ds must be positive");
  }
  WaypointPath out;
  if (path.pts.empty()) return out;
  out.pts.push_back(path.pts.front());
  for (std::size_t i = 1; i < path.pts.size(); ++i) {
    const Vec2& a = path.pts[i - 1];
    const Vec2& b = path.pts[i];
    const double len = dist(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / ds)));
    for (int k = 1; k <= n; ++k) {
      const double f = static_cast<double>(k) / n;
      out.pts.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
    }
  }
  return out;
}

double velocity_limit(double kappa, const SpeedLimits& limits) {
  if (kappa == 0.0) return limits.v_max;
  return std::min(limits.v_max, limits.omega_max / std::abs(kappa));
}

TimedSE2Trajectory time_parameterize(const WaypointPath& path,
                                     const SpeedLimits& limits, double ds,
                                     double t0) {
  if (limits.v_max <= 0.0 || limits.a_max <= 0.0 || limits.omega_max <= 0.0) {
    throw std::domain_error("time_parameterize: limits must be positive");
  }
  TimedSE2Trajectory traj;
  traj.reference_time = t0;
  if (path.pts.empty()) return traj;

  // Merge collinear runs: keep only endpoints and direction changes.
  std::vector<Vec2> verts;
  verts.push_back(path.pts.front());
  for (std::size_t i = 1; i < path.pts.size(); ++i) {
    if (near(dist(verts.back(), path.pts[i]), 0.0)) continue;
    if (verts.size() >= 2) {
      const double h_prev = heading(verts[verts.size() - 2], verts.back());
      const double h_next = heading(verts.back(), path.pts[i]);
      if (near(wrap_angle(h_next - h_prev), 0.0, 1e-12)) {
        verts.back() = path.pts[i];
        continue;
      }
    }
    verts.push_back(path.pts[i]);
  }

  if (verts.size() < 2) {
    traj.samples.push_back({t0, verts[0].x, verts[0].y, 0.0});
    return traj;
  }

  // Dense samples along each axis-aligned (or straight) segment.
  struct Node {
    Vec2 p;
    double theta;   // heading of the owning segment
    double ds_prev; // arc length from the previous node
    bool corner;    // start of a new segment after a direction change
    double dtheta;  // heading change at a corner
  };
  std::vector<Node> nodes;
  for (std::size_t s = 0; s + 1 < verts.size(); ++s) {
    const Vec2& a = verts[s];
    const Vec2& b = verts[s + 1];
    const double len = dist(a, b);
    const double th = heading(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / ds)));
    if (s == 0) nodes.push_back({a, th, 0.0, false, 0.0});
    if (s > 0) {
      const double dth = wrap_angle(th - nodes.back().theta);
      nodes.push_back({a, th, 0.0, true, dth});
    }
    for (int k = 1; k <= n; ++k) {
      const double f = static_cast<double>(k) / n;
      nodes.push_back({{a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)},
                       th,
                       len / n,
                       false,
                       0.0});
    }
  }

  // Forward-backward pass; v = 0 at both ends and at every corner.
  const std::size_t n = nodes.size();
  std::vector<double> v(n, limits.v_max);
  v.front() = 0.0;
  v.back() = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].corner) v[i] = 0.0;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double reach =
        std::sqrt(v[i - 1] * v[i - 1] + 2.0 * limits.a_max * nodes[i].ds_prev);
    v[i] = std::min(v[i], reach);
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    const double reach =
        std::sqrt(v[i + 1] * v[i + 1] + 2.0 * limits.a_max * nodes[i + 1].ds_prev);
    v[i] = std::min(v[i], reach);
  }

  // Timestamps: trapezoidal integration, exact for constant acceleration.
  double t = t0;
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].corner) {
      // In-place rotation dwell. The previous segment's last sample already
      // sits at this vertex with the old heading, so only the post-dwell
      // sample is emitted.
      t += std::abs(nodes[i].dtheta) / limits.omega_max;
      traj.samples.push_back({t, nodes[i].p.x, nodes[i].p.y, nodes[i].theta});
      continue;
    }
    if (i > 0) {
      const double vbar = 0.5 * (v[i - 1] + v[i]);
      if (vbar <= 0.0) {
        throw std::logic_error("time_parameterize: stalled profile");
      }
      t += nodes[i].ds_prev / vbar;
    }
    traj.samples.push_back({t, nodes[i].p.x, nodes[i].p.y, nodes[i].theta});
  }
  return traj;
}

PrimitiveProgram to_primitives(const WaypointPath& path, double step_m,
                               double turn_deg) {
  if (step_m <= 0.0 || turn_deg <= 0.0) {
    throw std::domain_error("to_primitives: step and turn must be positive");
  }
  PrimitiveProgram prog;
  prog.step_m = step_m;
  prog.turn_deg = turn_deg;
  if (path.pts.empty()) return prog;

  double theta = path.pts.size() >= 2 ? heading(path.pts[0], path.pts[1]) : 0.0;
  Vec2 pos = path.pts.front();
  prog.start_x = pos.x;
  prog.start_y = pos.y;
  prog.start_theta = theta;

  const double turn_rad = turn_deg * kDegToRad;
  for (std::size_t i = 1; i < path.pts.size(); ++i) {
    const Vec2& goal = path.pts[i];
    const double d = dist(pos, goal);
    if (near(d, 0.0)) continue;
    const double dtheta = wrap_angle(heading(pos, goal) - theta);
    if (!near(dtheta, 0.0, 1e-9)) {
      const int k =
          static_cast<int>(std::ceil(std::abs(dtheta) / turn_rad - 1e-9));
      const double sign = dtheta > 0.0 ? 1.0 : -1.0;
      prog.commands.push_back(
          {PrimitiveCommand::Kind::Turn, sign * turn_deg, k});
      theta = wrap_angle(theta + sign * k * turn_rad);
    }
    const int steps = static_cast<int>(std::ceil(d / step_m - 1e-9));
    prog.commands.push_back({PrimitiveCommand::Kind::Forward, step_m, steps});
    pos.x += steps * step_m * std::cos(theta);
    pos.y += steps * step_m * std::sin(theta);
  }
  return prog;
}

std::vector<TrajSample> replay_primitives(const PrimitiveProgram& program) {
  std::vector<TrajSample> poses;
  double x = program.start_x, y = program.start_y, theta = program.start_theta;
  poses.push_back({0.0, x, y, theta});
  for (const PrimitiveCommand& cmd : program.commands) {
    for (int k = 0; k < cmd.count; ++k) {
      if (cmd.kind == PrimitiveCommand::Kind::Turn) {
        theta = wrap_angle(theta + cmd.amount * kDegToRad);
      } else {
        x += cmd.amount * std::cos(theta);
        y += cmd.amount * std::sin(theta);
      }
      poses.push_back({0.0, x, y, theta});
    }
  }
  return poses;
}

ValidationReport validate_trajectory(const TimedSE2Trajectory& traj,
                                     const SpeedLimits& limits) {
  ValidationReport rep;
  const auto& s = traj.samples;
  if (s.size() < 2) return rep;
  constexpr double kTol = 1e-6;

  double prev_speed = 0.0;
  double prev_dt = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double dt = s[i].t - s[i - 1].t;
    if (dt <= 0.0) {
      return {false, "monotonicity", i};
    }
    const double step = std::hypot(s[i].x - s[i - 1].x, s[i].y - s[i - 1].y);
    const double speed = step / dt;
    if (speed > limits.v_max + kTol) {
      return {false, "speed", i};
    }
    const double omega = std::abs(wrap_angle(s[i].theta - s[i - 1].theta)) / dt;
    if (omega > limits.omega_max + kTol) {
      return {false, "omega", i};
    }
    if (i > 1) {
      const double accel =
          std::abs(speed - prev_speed) / (0.5 * (dt + prev_dt));
      if (accel > limits.a_max + kTol) {
        return {false, "accel", i};
      }
    }
    prev_speed = speed;
    prev_dt = dt;
  }
  return rep;
}

void save_trajectory_json(const TimedSE2Trajectory& traj,
                          const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["reference_time"] = traj.reference_time;
  j["frame_label"] = traj.frame_label;
  j["samples"] = nlohmann::ordered_json::array();
  for (const TrajSample& s : traj.samples) {
    j["samples"].push_back({{"t", s.t}, {"x", s.x}, {"y", s.y}, {"theta", s.theta}});
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write trajectory: " + path.string());
  }
  out << j.dump(2) << '\n';
}

TimedSE2Trajectory load_trajectory_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read trajectory: " + path.string());
  }
  nlohmann::json j;
  in >> j;
  TimedSE2Trajectory traj;
  traj.reference_time = j.at("reference_time").get<double>();
  traj.frame_label = j.at("frame_label").get<std::string>();
  for (const auto& s : j.at("samples")) {
    traj.samples.push_back({s.at("t").get<double>(), s.at("x").get<double>(),
                            s.at("y").get<double>(), s.at("theta").get<double>()});
  }
  return traj;
}

void save_primitives(const PrimitiveProgram& program,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write primitives: " + path.string());
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "START %.6f %.6f %.6f\n", program.start_x,
                program.start_y, program.start_theta);
  out << buf;
  for (const PrimitiveCommand& cmd : program.commands) {
    if (cmd.kind == PrimitiveCommand::Kind::Turn) {
      std::snprintf(buf, sizeof(buf), "TURN %+g x%d\n", cmd.amount, cmd.count);
    } else {
      std::snprintf(buf, sizeof(buf), "FWD %g x%d\n", cmd.amount, cmd.count);
    }
    out << buf;
  }
}

PrimitiveProgram load_primitives(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read primitives: " + path.string());
  }
  PrimitiveProgram prog;
  std::string kind;
  bool have_start = false;
  while (in >> kind) {
    if (kind == "START") {
      in >> prog.start_x >> prog.start_y >> prog.start_theta;
      have_start = true;
      continue;
    }
    double amount = 0.0;
    std::string count_tok;
    if (!(in >> amount >> count_tok) || count_tok.size() < 2 ||
        count_tok[0] != 'x') {
      throw std::runtime_error("malformed primitive line in " + path.string());
    }
    const int count = std::stoi(count_tok.substr(1));
    if (kind == "TURN") {
      prog.commands.push_back({PrimitiveCommand::Kind::Turn, amount, count});
    } else if (kind == "FWD") {
      prog.commands.push_back({PrimitiveCommand::Kind::Forward, amount, count});
    } else {
      throw std::runtime_error("unknown primitive '" + kind + "' in " +
                               path.string());
    }
  }
  if (!have_start) {
    throw std::runtime_error("primitive file missing START line: " +
                             path.string());
  }
  return prog;
}

}  // namespace hcov
