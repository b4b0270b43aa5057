#include "aerobridge/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "aerobridge/error.hpp"

namespace aerobridge {
namespace {

ScenarioConfig indoor(const ScenarioConfig& base) {
  ScenarioConfig c = base;
  c.wind_ambient = base.experiment_indoor_wind;
  c.wind_gust_sigma = base.experiment_indoor_gust_sigma;
  return c;
}

void require_iterations(int iterations) {
  if (iterations < 2) throw Error(ErrorCode::kInvalidArgument, "experiments need >= 2 iterations");
}

// Side the EBS starts on for each forced pair, in the receiver frame.
Vec3 cmp_start_offset(Association association) {
  switch (association) {
    case Association::kLeftBack: return Vec3(-0.10, 0.20, 0.15);
    case Association::kRightBack: return Vec3(-0.10, -0.20, 0.15);
    default: return Vec3(-0.25, 0.0, 0.15);
  }
}

}  // namespace

double trajectory_displacement(const ScenarioConfig& base, TrajectoryKind kind,
                               std::uint64_t seed) {
  ScenarioConfig c = indoor(base);
  c.seed = seed;
  const double yaw = deg2rad(c.receiver_yaw_deg);
  const Mat3 r = rotation_z(yaw);
  const double sep = c.experiment_separation;
  const Pose receiver{c.receiver_position, quaternion_from_yaw(yaw)};
  const Pose ebs{c.receiver_position + r * Vec3(-sep, 0.0, sep), quaternion_from_yaw(yaw)};

  DockingRig rig(c, seed, ebs, receiver);
  const Vec3 dock_direction = r * Vec3(-1.0, 0.0, 0.0);
  rig.follow(plan_trajectory(kind, ebs.position, receiver.position, standoff(c), dock_direction),
             c.experiment_trajectory_speed, yaw);

  double worst = 0.0;
  std::optional<double> arrived;
  while (!arrived || rig.now() < *arrived + c.experiment_trajectory_window - 1e-9) {
    const DockingRig::Tick tick = rig.tick();
    const Vec3 d = rig.receiver().pose.position - rig.receiver_setpoint();
    worst = std::max(worst, std::hypot(d.x(), d.y()));
    if (tick.follow_finished && !arrived) arrived = rig.now();
    if (rig.now() > c.duration) break;
  }
  return worst;
}

const TrajectoryStats& TrajectoryExperiment::row(TrajectoryKind kind) const {
  for (const TrajectoryStats& s : rows) {
    if (s.kind == kind) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "trajectory kind missing from the experiment");
}

TrajectoryExperiment experiment_trajectories(const ScenarioConfig& base, int iterations) {
  require_iterations(iterations);
  validate_config(base);
  TrajectoryExperiment out;
  for (TrajectoryKind kind : kAllTrajectoryKinds) {
    TrajectoryStats s;
    s.kind = kind;
    s.iterations = iterations;
    s.min = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int i = 1; i <= iterations; ++i) {
      const double d = trajectory_displacement(base, kind, static_cast<std::uint64_t>(i));
      sum += d;
      s.min = std::min(s.min, d);
      s.max = std::max(s.max, d);
    }
    s.mean = sum / iterations;
    out.rows.push_back(s);
  }
  return out;
}

CmpTrial cmp_trial(const ScenarioConfig& base, Association association, double noise_sigma,
                   std::uint64_t seed) {
  ScenarioConfig c = indoor(base);
  c.seed = seed;
  c.camera_noise_sigma = noise_sigma;
  c.nav_association = association;
  const NavParams nav = nav_params(c);
  const double yaw = deg2rad(c.receiver_yaw_deg);
  const Mat3 r = rotation_z(yaw);
  const Pose receiver{c.receiver_position, quaternion_from_yaw(yaw)};
  const Vec3 dock = c.receiver_position + r * nav.target_offset;
  const Pose ebs{dock + r * cmp_start_offset(association), quaternion_from_yaw(yaw)};

  DockingRig rig(c, seed, ebs, receiver);
  rig.start_nav(dock + Vec3(0.0, 0.0, c.nav_reacquire_height), yaw);

  CmpTrial out;
  double e = 0.0, alpha = 0.0, true_e = 0.0, true_alpha = 0.0;
  double steady_e = 0.0, steady_alpha = 0.0;
  const double horizon = c.experiment_cmp_settle + c.experiment_cmp_window;
  while (rig.now() < horizon - 1e-9) {
    const DockingRig::Tick tick = rig.tick();
    const NavState& s = rig.nav();
    if (!out.locked) {
      if (s.phase != NavPhase::kLock) {
        if (rig.now() >= c.experiment_cmp_settle) break;
        continue;
      }
      out.locked = true;
      out.lock_time = rig.now();
    }
    if (rig.now() > out.lock_time + c.experiment_cmp_window) break;
    if (!tick.frame_processed || s.phase != NavPhase::kLock) continue;
    const FrameTransform m = rig.misalignment();
    e += s.last_errors.e * 100.0;
    alpha += s.last_errors.alpha;
    true_e += m.translation.norm() * 100.0;
    true_alpha += rad2deg(rotation_angle(m.rotation));
    ++out.frames;
    if (rig.now() >= out.lock_time + c.experiment_cmp_window - c.experiment_cmp_steady) {
      steady_e += s.last_errors.e * 100.0;
      steady_alpha += s.last_errors.alpha;
      ++out.steady_frames;
    }
  }
  if (out.frames > 0) {
    out.e_cm = e / out.frames;
    out.alpha_deg = alpha / out.frames;
    out.true_e_cm = true_e / out.frames;
    out.true_alpha_deg = true_alpha / out.frames;
  }
  if (out.steady_frames > 0) {
    out.steady_e_cm = steady_e / out.steady_frames;
    out.steady_alpha_deg = steady_alpha / out.steady_frames;
  }
  return out;
}

CmpExperiment experiment_cmp_accuracy(const ScenarioConfig& base, int iterations) {
  require_iterations(iterations);
  validate_config(base);
  CmpExperiment out;
  for (double sigma : {0.0, base.camera_noise_sigma}) {
    for (Association a : {Association::kLeftBack, Association::kRightBack,
                          Association::kFrontBack}) {
      CmpRow row;
      row.association = a;
      row.noise_sigma = sigma;
      row.iterations = iterations;
      for (int i = 1; i <= iterations; ++i) {
        const CmpTrial t = cmp_trial(base, a, sigma, static_cast<std::uint64_t>(i));
        if (!t.locked || t.steady_frames == 0) continue;
        ++row.locked;
        row.mean_e_cm += t.e_cm;
        row.mean_alpha_deg += t.alpha_deg;
        row.mean_true_e_cm += t.true_e_cm;
        row.mean_true_alpha_deg += t.true_alpha_deg;
        row.mean_steady_e_cm += t.steady_e_cm;
        row.mean_steady_alpha_deg += t.steady_alpha_deg;
      }
      if (row.locked > 0) {
        row.mean_e_cm /= row.locked;
        row.mean_alpha_deg /= row.locked;
        row.mean_true_e_cm /= row.locked;
        row.mean_true_alpha_deg /= row.locked;
        row.mean_steady_e_cm /= row.locked;
        row.mean_steady_alpha_deg /= row.locked;
      }
      out.rows.push_back(row);
    }
  }
  return out;
}

ProtocolExperiment experiment_protocol_check(const ScenarioConfig& base) {
  CheckerConfig k = checker_config(base);
  ProtocolExperiment out;
  out.nominal = exhaustive_interleave_check(k);
  k.mutant_release_without_ack = true;
  out.mutant = exhaustive_interleave_check(k);
  return out;
}

}  // namespace aerobridge
