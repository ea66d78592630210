#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hcov/action.hpp"

namespace hcov {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

/// Metric waypoint polyline (cell centers). After L-corner insertion every
/// segment is axis-aligned.
struct WaypointPath {
  std::vector<Vec2> pts;
};

struct SpeedLimits {
  double v_max = 0.8;     // m/s
  double a_max = 0.5;     // m/s^2
  double omega_max = 0.9; // rad/s
};

struct TrajSample {
  double t = 0.0;
  double x = 0.0, y = 0.0;
  double theta = 0.0;  // radians in (-pi, pi]
};

struct TimedSE2Trajectory {
  double reference_time = 0.0;
  std::string frame_label = "VISION";
  std::vector<TrajSample> samples;
};

struct PrimitiveCommand {
  enum class Kind { Turn, Forward } kind = Kind::Forward;
  double amount = 0.0;  // degrees per turn (signed) or meters per step
  int count = 0;
};

struct PrimitiveProgram {
  double start_x = 0.0, start_y = 0.0, start_theta = 0.0;
  double step_m = 0.25;
  double turn_deg = 30.0;
  std::vector<PrimitiveCommand> commands;
};

double wrap_angle(double a);  // into (-pi, pi]

/// Cell centers at cell_size*(i+0.5); duplicate-collapsed. With
/// insert_corners, diagonal chords are replaced by an x-then-y L-corner.
/// Throws std::domain_error on an empty ordering.
WaypointPath cells_to_waypoints(std::span<const Cell> cells, double cell_size,
                                bool insert_corners = true);

/// Optional arc-length resampling; corner vertices are preserved.
WaypointPath resample_by_arc_length(const WaypointPath& path, double ds);

/// min(v_max, omega_max/|kappa|).
double velocity_limit(double kappa, const SpeedLimits& limits);

/// Forward-backward velocity profile at arc-length resolution ds with
/// v(0)=v(S)=0; corners (direction changes) force v=0 and insert an
/// in-place rotation dwell of |dtheta|/omega_max.
TimedSE2Trajectory time_parameterize(const WaypointPath& path,
                                     const SpeedLimits& limits,
                                     double ds = 0.05, double t0 = 0.0);

/// Per waypoint: ceil(|wrap(dtheta)|/turn) signed turns, then ceil(d/step)
/// forward steps; pose tracked after each primitive.
PrimitiveProgram to_primitives(const WaypointPath& path, double step_m = 0.25,
                               double turn_deg = 30.0);

/// Poses visited while executing the program (start pose plus the pose
/// after every individual turn/step).
std::vector<TrajSample> replay_primitives(const PrimitiveProgram& program);

struct ValidationReport {
  bool ok = true;
  std::string violation;     // "speed" | "accel" | "omega" | "monotonicity"
  std::size_t sample_index = 0;
};

ValidationReport validate_trajectory(const TimedSE2Trajectory& traj,
                                     const SpeedLimits& limits);

void save_trajectory_json(const TimedSE2Trajectory& traj,
                          const std::filesystem::path& path);
TimedSE2Trajectory load_trajectory_json(const std::filesystem::path& path);

void save_primitives(const PrimitiveProgram& program,
                     const std::filesystem::path& path);
PrimitiveProgram load_primitives(const std::filesystem::path& path);

}  // namespace hcov
