#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "aerobridge/aero.hpp"
#include "aerobridge/geometry.hpp"

namespace aerobridge {

struct VehicleParams {
  double mass = 2.6;            // kg
  double frame_size = 0.695;    // m
  double max_lift = 4.8;        // kgf
  double pos_p = 2.0;           // s^-2
  double pos_d = 2.8;           // s^-1
  double pos_i = 0.5;           // s^-3, flight-controller integrator
  double vel_p = 2.8;           // s^-1, velocity-tracking mode
  double vel_i = 1.0;           // s^-2
  double yaw_p = 2.0;           // s^-1
  double drag = 0.3;            // N per m/s of air-relative velocity

  bool is_valid() const;
  double max_thrust_newtons() const { return max_lift * kGravity; }
};

struct VehicleState {
  Pose pose;
  Vec3 velocity = Vec3::Zero();
  Vec3 body_rates = Vec3::Zero();
  double commanded_thrust = 0.0;  // gF
  double battery_level = 100.0;   // percent
};

/// Thrust vector request plus heading behaviour for one physics step.
struct VehicleCommand {
  Vec3 thrust = Vec3::Zero();  // N, world frame
  double yaw = 0.0;            // heading setpoint (rad), used unless rate_mode
  double yaw_rate = 0.0;       // rad/s, used in rate_mode
  bool rate_mode = false;
};

/// PD position hold with gravity feed-forward, saturated to max lift.
VehicleCommand position_hold_command(const VehicleState& state, const Vec3& setpoint,
                                     const VehicleParams& params, double yaw_setpoint = 0.0);

/// Position hold with the flight controller's integrator on top of the PD law.
class PositionController {
 public:
  VehicleCommand update(const VehicleState& state, const Vec3& setpoint, double yaw_setpoint,
                        const VehicleParams& params, double dt);
  void reset() { integral_.setZero(); }
  const Vec3& integral() const { return integral_; }
  void set_integral(const Vec3& integral) { integral_ = integral; }

 private:
  Vec3 integral_ = Vec3::Zero();
};

/// Tracks a world-frame velocity and yaw-rate request (the navigation interface).
class VelocityController {
 public:
  VehicleCommand update(const VehicleState& state, const Vec3& velocity, double yaw_rate,
                        const VehicleParams& params, double dt);
  void reset() { integral_.setZero(); }
  const Vec3& integral() const { return integral_; }
  void set_integral(const Vec3& integral) { integral_ = integral; }

 private:
  Vec3 integral_ = Vec3::Zero();
};

/// Semi-implicit Euler step of the point-mass + yaw model.
VehicleState step(const VehicleState& state, const VehicleCommand& command,
                  const Disturbance& disturbance, const Vec3& wind, const VehicleParams& params,
                  double dt);

/// Constant ambient wind plus Ornstein-Uhlenbeck gusts, gust magnitude capped.
class WindModel {
 public:
  WindModel(Vec3 ambient, double gust_sigma, double gust_tau, std::uint64_t seed,
            double gust_cap = 4.0);

  Vec3 sample(double dt);
  const Vec3& ambient() const { return ambient_; }

 private:
  Vec3 ambient_;
  double sigma_;
  double tau_;
  double cap_;
  Vec3 gust_ = Vec3::Zero();
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

enum class TrajectoryKind { kHV, kHH, kVV, kVH };

inline constexpr TrajectoryKind kAllTrajectoryKinds[] = {TrajectoryKind::kHV, TrajectoryKind::kHH,
                                                         TrajectoryKind::kVV, TrajectoryKind::kVH};

const char* to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(const std::string& name);

struct StandoffGeometry {
  double horizontal = 0.5;  // m
  double vertical = 0.5;    // m
};

/// Waypoints from `start` to the docking point beside `receiver_point`.
///
/// The docking point sits `standoff.vertical` above the receiver and
/// `standoff.horizontal` away from it along `dock_direction` (horizontal; when
/// zero, the direction towards the start is used).
///   V-H: descend/climb to docking altitude in place, then close horizontally.
///   H-V: align horizontally over the receiver at start altitude, then move
///        vertically down to the docking point.
///   H-H: horizontal legs only, over the receiver and out to the docking point.
///   V-V: vertical legs only above the start position.
/// Legs a kind cannot express (H-H altitude gap, V-V horizontal gap) are
/// closed by one extra waypoint.
std::vector<Vec3> plan_trajectory(TrajectoryKind kind, const Vec3& start,
                                  const Vec3& receiver_point, const StandoffGeometry& standoff = {},
                                  const Vec3& dock_direction = Vec3::Zero());

Vec3 docking_point(const Vec3& start, const Vec3& receiver_point, const StandoffGeometry& standoff,
                   const Vec3& dock_direction = Vec3::Zero());

/// Moves a setpoint along a polyline at constant speed.
class WaypointFollower {
 public:
  WaypointFollower(Vec3 start, std::vector<Vec3> waypoints, double speed);

  Vec3 advance(double dt);
  bool finished() const { return index_ >= waypoints_.size(); }
  const Vec3& setpoint() const { return current_; }

 private:
  Vec3 current_;
  std::vector<Vec3> waypoints_;
  std::size_t index_ = 0;
  double speed_;
};

/// Max horizontal deviation of a position trace from `reference`.
double displacement_metric(const std::vector<Vec3>& trace, const Vec3& reference);

}  // namespace aerobridge
