#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aerobridge/config.hpp"

namespace aerobridge {

struct TraceRow {
  double t = 0.0;
  Vec3 ebs_position = Vec3::Zero();
  Vec3 receiver_position = Vec3::Zero();
  bool has_errors = false;
  double e_cm = 0.0;
  double alpha_deg = 0.0;
  NavPhase phase = NavPhase::kSearch;
  bool nav_active = false;
  EbsState ebs_state = EbsState::kIdle;
  ReceiverState receiver_state = ReceiverState::kMission;
};

struct EventRow {
  double t = 0.0;
  std::string source;  // ebs, receiver, link, nav, transfer, sim
  std::string event;
  std::string detail;
};

struct ObservationRow {
  double t = 0.0;  // capture time
  MarkerObservation observation;
  bool has_estimate = false;  // the frame produced a pose estimate
  Vec3 est_position = Vec3::Zero();  // EBS in the receiver frame
  double est_heading = 0.0;          // rad
};

struct NavLogRow {
  double t = 0.0;
  NavPhase phase = NavPhase::kSearch;
  double e_cm = 0.0;
  double alpha_deg = 0.0;
  NavCommand command;
  bool detected = false;
};

struct RunSummary {
  std::uint64_t seed = 0;
  bool success = false;
  std::string outcome;  // TransferDone, Aborted, Timeout, Error
  std::string reason;
  double sim_time = 0.0;
  std::optional<double> lock_time;
  std::optional<double> transfer_duration;
  std::optional<TransferTimeline> timeline;
  double max_displacement = 0.0;  // receiver, horizontal, from its hold setpoint
  std::optional<double> lock_mean_e_cm;
  std::optional<double> lock_mean_alpha_deg;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_dropped = 0;
  int batteries_left = 0;
};

struct RunReport {
  RunSummary summary;
  std::vector<TraceRow> trace;
  std::vector<EventRow> events;
  std::vector<ObservationRow> observations;
  std::vector<NavLogRow> nav_log;
};

/// Independent, reproducible sub-stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Local tangent-plane metres (x east, y north, z up) to a GPS fix about the
/// configured origin, and back.
GpsCoordinate local_to_gps(const Vec3& local, const ScenarioConfig& config);
Vec3 gps_to_local(const GpsCoordinate& gps, const ScenarioConfig& config);

/// Two vehicles in one wind field with the EBS camera, perception and
/// navigation pipeline. Advances on the physics clock; camera frames are
/// quantized to ticks and reach the controller `camera_latency_frames` later.
class DockingRig {
 public:
  enum class EbsMode { kHold, kFollow, kNav };

  DockingRig(const ScenarioConfig& config, std::uint64_t seed, const Pose& ebs_start,
             const Pose& receiver_start);

  void hold_ebs(const Vec3& setpoint, double yaw);
  void follow(const std::vector<Vec3>& waypoints, double speed, double yaw);
  void start_nav(const Vec3& search_anchor, double search_heading);

  struct Tick {
    bool frame_processed = false;
    std::optional<NavPhase> phase_before;  // set when the nav phase changed
    bool follow_finished = false;
  };

  Tick tick();

  double now() const { return now_; }
  double dt() const { return dt_; }
  EbsMode mode() const { return mode_; }
  const VehicleState& ebs() const { return ebs_; }
  const VehicleState& receiver() const { return receiver_; }
  const Vec3& receiver_setpoint() const { return receiver_setpoint_; }
  const NavState& nav() const { return nav_; }
  const NavCommand& nav_command() const { return command_; }
  bool last_frame_detected() const { return last_detected_; }
  const std::vector<ObservationRow>& last_observations() const { return last_observations_; }

  /// True docking misalignment: EBS pose in the receiver frame relative to
  /// the nominal docked pose.
  FrameTransform misalignment() const;

 private:
  ScenarioConfig config_;
  VehicleParams ebs_params_;
  VehicleParams receiver_params_;
  NavParams nav_params_;
  CameraIntrinsics intrinsics_;
  CmpLayout layout_;
  VisibilityEnvelope envelope_;
  DownwashTable table_;
  WindModel wind_;
  std::mt19937_64 camera_rng_;

  double dt_;
  double now_ = 0.0;
  std::uint64_t ticks_ = 0;
  std::uint64_t next_frame_ = 0;

  VehicleState ebs_;
  VehicleState receiver_;
  Vec3 receiver_setpoint_;
  double receiver_yaw_;
  PositionController receiver_ctrl_;
  PositionController ebs_pos_ctrl_;
  VelocityController ebs_vel_ctrl_;

  EbsMode mode_ = EbsMode::kHold;
  Vec3 ebs_setpoint_;
  double ebs_yaw_setpoint_ = 0.0;
  std::optional<WaypointFollower> follower_;

  NavState nav_;
  NavCommand command_;
  bool last_detected_ = false;
  std::deque<std::pair<double, std::vector<MarkerObservation>>> pipeline_;
  std::vector<ObservationRow> last_observations_;
};

/// Runs the full handoff: battery request, verification, approach, search,
/// alignment, lock, slide transfer and closing. Never throws for module
/// failures; they end the run with outcome "Error".
RunReport run_scenario(const ScenarioConfig& config);

}  // namespace aerobridge
