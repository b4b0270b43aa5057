#include "aerobridge/nav.hpp"

#include <algorithm>
#include <cmath>

namespace aerobridge {
namespace {

Vec3 saturate(const Vec3& v, double limit) {
  return v.cwiseMax(Vec3::Constant(-limit)).cwiseMin(Vec3::Constant(limit));
}

NavCommand search_command(const NavState& nav, const Pose& ebs, const NavParams& params) {
  const Vec3 setpoint = search_pattern(nav.search_elapsed, nav.search_anchor, params.search_speed,
                                       params.search_leg_growth);
  NavCommand cmd;
  cmd.velocity = saturate(params.align_gain * (setpoint - ebs.position), params.max_speed);
  // Face the reported receiver heading; the receiver lies ahead of the anchor.
  cmd.yaw_rate = std::clamp(params.yaw_gain * wrap_angle(nav.search_heading - ebs.yaw()),
                            -params.max_yaw_rate, params.max_yaw_rate);
  return cmd;
}

NavCommand align_command(const FrameTransform& rec_in_body, const NavState& nav, const Pose& ebs,
                         const NavParams& params) {
  const Vec3 offset_error = params.target_offset - nav.relative_position;
  const Mat3 body_to_world = ebs.attitude.normalized().toRotationMatrix();
  Vec3 error_world = body_to_world * rec_in_body.rotation * offset_error;

  // Close the altitude gap before the horizontal one.
  if (std::abs(error_world.z()) > params.vertical_first_gate &&
      std::hypot(error_world.x(), error_world.y()) > params.vertical_first_gate) {
    error_world.x() = 0.0;
    error_world.y() = 0.0;
  }
  NavCommand cmd;
  cmd.velocity = saturate(params.align_gain * error_world, params.max_speed);

  double yaw_error = nav.relative_heading;
  if (nav.last_errors.e > params.bearing_mode_distance) {
    const Vec3& p = rec_in_body.translation;
    yaw_error = std::atan2(p.y(), p.x());
  }
  cmd.yaw_rate =
      std::clamp(params.yaw_gain * yaw_error, -params.max_yaw_rate, params.max_yaw_rate);
  return cmd;
}

}  // namespace

const char* to_string(NavPhase phase) {
  switch (phase) {
    case NavPhase::kSearch: return "SEARCH";
    case NavPhase::kAlign: return "ALIGN";
    case NavPhase::kLock: return "LOCK";
    case NavPhase::kLost: return "LOST";
  }
  return "?";
}

bool within_thresholds(const AlignmentErrors& errors, const NavThresholds& thresholds) {
  return errors.e <= thresholds.max_position_error && errors.alpha <= thresholds.max_heading_error;
}

bool lock_check(const AlignmentErrors& errors, int consecutive_good_frames,
                const NavThresholds& thresholds) {
  return within_thresholds(errors, thresholds) &&
         consecutive_good_frames + 1 >= thresholds.lock_frames;
}

Vec3 search_pattern(double elapsed, const Vec3& anchor, double speed, double leg_growth) {
  static const Vec3 kDirections[4] = {Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitX(),
                                      -Vec3::UnitY()};
  double remaining = std::max(0.0, elapsed) * speed;
  Vec3 p = anchor;
  for (int leg = 0;; ++leg) {
    const double length = leg_growth * (leg / 2 + 1);
    const Vec3& dir = kDirections[leg % 4];
    if (remaining <= length) return p + remaining * dir;
    p += length * dir;
    remaining -= length;
  }
}

FrameTransform receiver_in_body(const FusedPose& fused, const CameraMount& mount) {
  return mount.camera_in_body() * fused.receiver_in_camera;
}

NavStep nav_step(const NavState& nav, const NavInput& input, const NavParams& params, double dt) {
  NavStep out{nav, {}};
  NavState& next = out.state;

  const bool detected = input.frame_received && input.fused.has_value() &&
                        input.fused->receiver_in_camera.translation.norm() <=
                            params.detection_range;
  if (!detected) {
    next.time_since_detection += dt;
    switch (nav.phase) {
      case NavPhase::kAlign:
      case NavPhase::kLock:
        if (next.time_since_detection >= params.thresholds.lost_timeout) {
          next.phase = NavPhase::kLost;
          next.consecutive_good_frames = 0;
        }
        break;
      case NavPhase::kLost:
        next.phase = NavPhase::kSearch;
        next.search_elapsed = 0.0;
        out.command = search_command(next, input.ebs_pose, params);
        break;
      case NavPhase::kSearch:
        next.search_elapsed += dt;
        out.command = search_command(next, input.ebs_pose, params);
        break;
    }
    return out;
  }

  // Both vehicles hover level: keep the measured translation and only the yaw
  // of the rotation. Without a marker pair the yaw comes from the reported
  // heading; single-marker tilt and yaw are too noisy at range.
  const FrameTransform measured = receiver_in_body(*input.fused, params.mount);
  const double yaw_in_body =
      input.fused->heading_defined
          ? std::atan2(measured.rotation(1, 0), measured.rotation(0, 0))
          : wrap_angle(nav.search_heading - input.ebs_pose.yaw());
  const FrameTransform rec_in_body{rotation_z(yaw_in_body), measured.translation};
  next.time_since_detection = 0.0;
  next.has_estimate = true;
  next.relative_position = rec_in_body.inverse().translation;
  next.relative_heading = std::atan2(rec_in_body.rotation(1, 0), rec_in_body.rotation(0, 0));
  next.last_errors =
      alignment_errors(next.relative_position, next.relative_heading, params.target_offset, 0.0);

  // Later searches restart around the estimated docking point.
  const Mat3 body_to_world = input.ebs_pose.attitude.normalized().toRotationMatrix();
  next.search_anchor = input.ebs_pose.position +
                       body_to_world * rec_in_body.rotation *
                           (params.target_offset - next.relative_position) +
                       Vec3(0.0, 0.0, params.reacquire_height);
  if (input.fused->heading_defined) {
    next.search_heading = wrap_angle(input.ebs_pose.yaw() + next.relative_heading);
  }

  if (nav.phase == NavPhase::kSearch || nav.phase == NavPhase::kLost) {
    next.phase = NavPhase::kAlign;
    next.consecutive_good_frames = 0;
  }
  const bool good = input.fused->heading_defined &&
                    within_thresholds(next.last_errors, params.thresholds);
  if (good && lock_check(next.last_errors, next.consecutive_good_frames, params.thresholds)) {
    next.phase = NavPhase::kLock;
  } else if (!good && next.phase == NavPhase::kLock) {
    next.phase = NavPhase::kAlign;
  }
  next.consecutive_good_frames = good ? next.consecutive_good_frames + 1 : 0;
  out.command = align_command(rec_in_body, next, input.ebs_pose, params);
  return out;
}

}  // namespace aerobridge
