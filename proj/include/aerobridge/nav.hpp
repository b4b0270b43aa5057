#pragma once

#include <optional>

#include "aerobridge/perception.hpp"

namespace aerobridge {

enum class NavPhase { kSearch, kAlign, kLock, kLost };

const char* to_string(NavPhase phase);

struct NavThresholds {
  double max_position_error = 0.02;  // m
  double max_heading_error = 2.0;    // deg
  int lock_frames = 10;
  double lost_timeout = 1.0;         // s without detection
};

struct NavParams {
  NavThresholds thresholds;
  Vec3 target_offset = Vec3(-0.5, 0.0, 0.5);  // EBS position in the receiver frame
  double align_gain = 1.0;     // s^-1
  double yaw_gain = 1.0;       // s^-1
  double max_speed = 1.0;      // m/s per axis
  double max_yaw_rate = 0.5;   // rad/s
  double vertical_first_gate = 0.2;  // m
  double bearing_mode_distance = 0.25;  // m; beyond it yaw keeps the receiver centered
  double search_speed = 1.0;   // m/s
  double search_leg_growth = 1.0;  // m per lap
  double reacquire_height = 0.15;  // m above the estimated docking point after a loss
  double detection_range = 3.0;    // m, center marker
  CameraMount mount;
};

struct NavState {
  NavPhase phase = NavPhase::kSearch;
  int consecutive_good_frames = 0;
  double time_since_detection = 0.0;
  double search_elapsed = 0.0;
  Vec3 search_anchor = Vec3::Zero();
  double search_heading = 0.0;  // rad, held while searching
  bool has_estimate = false;
  Vec3 relative_position = Vec3::Zero();  // EBS in the receiver frame
  double relative_heading = 0.0;          // receiver yaw seen from the EBS body
  AlignmentErrors last_errors;
};

struct NavCommand {
  Vec3 velocity = Vec3::Zero();  // m/s, world frame
  double yaw_rate = 0.0;         // rad/s
};

/// One camera frame as seen by the controller.
struct NavInput {
  bool frame_received = true;    // false for a dropped frame
  std::optional<FusedPose> fused;  // empty when the center marker was not found
  Pose ebs_pose;                 // own navigation solution
};

/// True iff the frame is inside the thresholds and completes the run of
/// consecutive good frames required for LOCK.
bool lock_check(const AlignmentErrors& errors, int consecutive_good_frames,
                const NavThresholds& thresholds);

bool within_thresholds(const AlignmentErrors& errors, const NavThresholds& thresholds);

/// Expanding square around `anchor`: legs +x, +y, -x, -y, growing by
/// `leg_growth` every second leg, flown at `speed`. Altitude stays at anchor.
Vec3 search_pattern(double elapsed, const Vec3& anchor, double speed = 0.5,
                    double leg_growth = 0.5);

struct NavStep {
  NavState state;
  NavCommand command;
};

/// Advances the SEARCH / ALIGN / LOCK / LOST machine by one camera frame.
NavStep nav_step(const NavState& nav, const NavInput& input, const NavParams& params, double dt);

/// Receiver pose relative to the EBS body derived from a fused estimate.
FrameTransform receiver_in_body(const FusedPose& fused, const CameraMount& mount);

}  // namespace aerobridge
