#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "aerobridge/aero.hpp"
#include "aerobridge/checker.hpp"
#include "aerobridge/nav.hpp"
#include "aerobridge/perception.hpp"
#include "aerobridge/protocol.hpp"
#include "aerobridge/transfer.hpp"
#include "aerobridge/vehicle.hpp"

namespace aerobridge {

// Flat scenario description. Every member maps to one dotted key; angles are
// kept in degrees here and converted by the builders below.
struct ScenarioConfig {
  std::uint64_t seed = 42;
  double duration = 120.0;       // s, simulated cap
  double physics_rate = 100.0;   // Hz

  Vec3 wind_ambient = Vec3(4.0, 0.0, 0.0);
  double wind_gust_sigma = 0.3;
  double wind_gust_tau = 2.0;
  double wind_gust_cap = 4.0;

  double ebs_mass = 3.2;
  Vec3 ebs_start = Vec3(-8.0, 3.0, 15.0);
  double ebs_start_yaw_deg = 0.0;
  double receiver_mass = 2.6;
  Vec3 receiver_position = Vec3(0.0, 0.0, 10.0);
  double receiver_yaw_deg = 0.0;
  double receiver_battery = 20.0;      // percent at t = 0
  double receiver_request_time = 0.5;  // s when the battery-low event fires

  double max_lift = 4.8;
  double frame_size = 0.695;
  double pos_p = 2.0;
  double pos_d = 2.8;
  double pos_i = 0.5;
  double vel_p = 2.8;
  double vel_i = 1.0;
  double yaw_p = 2.0;
  double drag = 0.3;

  TrajectoryKind trajectory_kind = TrajectoryKind::kVH;
  double trajectory_speed = 1.0;  // m/s along the approach
  double standoff_horizontal = 0.5;
  double standoff_vertical = 0.5;

  double gps_sigma_horizontal = 1.5;
  double gps_sigma_vertical = 0.5;
  double gps_origin_latitude_deg = 0.0;
  double gps_origin_longitude_deg = 0.0;

  double camera_fx = 600.0;
  double camera_fy = 600.0;
  double camera_skew = 0.0;
  double camera_cx = 320.0;
  double camera_cy = 240.0;
  int camera_width = 640;
  int camera_height = 480;
  double camera_fps = 30.0;
  double camera_tilt_deg = 45.0;
  double camera_noise_sigma = 0.5;  // px
  int camera_latency_frames = 1;

  double layout_center_side = 0.070;
  double layout_satellite_side = 0.030;
  double layout_satellite_offset = 0.12;

  double envelope_min_angle_deg = 30.0;
  double envelope_max_angle_deg = 55.0;
  double envelope_reference_range = 3.0;

  double nav_max_position_error = 0.02;
  double nav_max_heading_error_deg = 2.0;
  int nav_lock_frames = 10;
  double nav_lost_timeout = 1.0;
  double nav_align_gain = 1.0;
  double nav_yaw_gain = 1.0;
  double nav_max_speed = 1.0;
  double nav_max_yaw_rate = 0.5;
  double nav_vertical_first_gate = 0.2;
  double nav_search_speed = 1.0;
  double nav_search_leg_growth = 1.0;
  Association nav_association = Association::kAuto;
  double nav_settle_time = 1.0;  // s of LOCK before the transfer starts
  double nav_search_height = 1.0;      // m above the reported docking point
  double nav_reacquire_height = 0.15;  // m above the estimated docking point

  double link_loss = 0.05;
  double link_latency = 0.020;
  double link_jitter = 0.010;

  ProtocolTimings protocol;

  double slide_ebs_length = 0.230;
  double slide_receiver_length = 0.210;
  double slide_incline_deg = 45.0;
  double slide_open_time = 1.5;
  double slide_close_time = 1.5;
  double servo_delay = 0.05;
  double battery_mass = 0.4;
  double battery_friction = 0.2;
  double latch_translation = 0.03;
  double latch_rotation_deg = 10.0;

  double aero_push_coefficient = DownwashTable::kDefaultPushCoefficient;
  // "aero.cell[<alt>,<overlap>].<field>" -> value
  std::map<std::string, double> aero_overrides;

  int experiment_trajectory_iterations = 50;
  double experiment_separation = 1.5;
  double experiment_trajectory_window = 6.0;  // s
  double experiment_trajectory_speed = 0.5;   // m/s
  Vec3 experiment_indoor_wind = Vec3::Zero();
  double experiment_indoor_gust_sigma = 0.05;
  int experiment_cmp_iterations = 20;
  double experiment_cmp_window = 10.0;  // s of averaging after the first LOCK
  double experiment_cmp_steady = 3.0;   // s at the end of the window counted as steady state
  double experiment_cmp_settle = 20.0;  // s allowed to reach LOCK
  int experiment_loss_budget = 2;
  int experiment_max_depth = 200;
  std::uint64_t experiment_frontier_cap = 2000000;
};

/// Strict parser: unknown keys, duplicate keys and malformed values raise
/// ConfigError naming the line and key.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Every key, one per line; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ScenarioConfig& config);

/// Range checks across all modules; throws ConfigError with the key.
void validate_config(const ScenarioConfig& config);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

VehicleParams ebs_params(const ScenarioConfig& c);
VehicleParams receiver_params(const ScenarioConfig& c);
CameraIntrinsics intrinsics(const ScenarioConfig& c);
CameraMount camera_mount(const ScenarioConfig& c);
CmpLayout layout(const ScenarioConfig& c);
VisibilityEnvelope envelope(const ScenarioConfig& c);
NavParams nav_params(const ScenarioConfig& c);
LinkModel link_model(const ScenarioConfig& c);
SlideGeometry slide_geometry(const ScenarioConfig& c);
BatterySpec battery_spec(const ScenarioConfig& c);
LatchTolerance latch_tolerance(const ScenarioConfig& c);
DownwashTable downwash_table(const ScenarioConfig& c);
StandoffGeometry standoff(const ScenarioConfig& c);
CheckerConfig checker_config(const ScenarioConfig& c);

}  // namespace aerobridge
