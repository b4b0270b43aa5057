#include "aerobridge/vehicle.hpp"

#include <algorithm>
#include <cmath>

#include "aerobridge/error.hpp"

namespace aerobridge {
namespace {

constexpr double kMaxIntegralAccel = 3.0;  // m/s^2
constexpr double kIntegrationBand = 0.2;          // m/s
constexpr double kPositionIntegrationBand = 1.0;  // m
constexpr double kPositionIntegrationSpeed = 0.05;  // m/s

Vec3 saturate_thrust(Vec3 thrust, const VehicleParams& params) {
  thrust.z() = std::max(0.0, thrust.z());
  const double limit = params.max_thrust_newtons();
  const double n = thrust.norm();
  if (n > limit) thrust *= limit / n;
  return thrust;
}

Vec3 clamp_norm(const Vec3& v, double limit) {
  const double n = v.norm();
  return n > limit ? Vec3(v * (limit / n)) : v;
}

}  // namespace

bool VehicleParams::is_valid() const {
  return mass > 0.0 && mass < max_lift && frame_size > 0.0 && pos_p > 0.0 && pos_d > 0.0 &&
         pos_i >= 0.0 && vel_p > 0.0 && vel_i >= 0.0 && yaw_p > 0.0 && drag >= 0.0;
}

VehicleCommand position_hold_command(const VehicleState& state, const Vec3& setpoint,
                                     const VehicleParams& params, double yaw_setpoint) {
  const Vec3 accel = params.pos_p * (setpoint - state.pose.position) - params.pos_d * state.velocity;
  VehicleCommand cmd;
  cmd.thrust = saturate_thrust(params.mass * (accel + Vec3(0.0, 0.0, kGravity)), params);
  cmd.yaw = yaw_setpoint;
  return cmd;
}

VehicleCommand PositionController::update(const VehicleState& state, const Vec3& setpoint,
                                          double yaw_setpoint, const VehicleParams& params,
                                          double dt) {
  VehicleCommand cmd = position_hold_command(state, setpoint, params, yaw_setpoint);
  if (params.pos_i > 0.0) {
    const Vec3 error = setpoint - state.pose.position;
    // Integrate only near rest so transients do not wind the integrator up.
    Vec3 accumulate = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
      if (std::abs(error[i]) < kPositionIntegrationBand &&
          std::abs(state.velocity[i]) < kPositionIntegrationSpeed) {
        accumulate[i] = error[i] * dt;
      }
    }
    integral_ = clamp_norm(integral_ + accumulate, kMaxIntegralAccel / params.pos_i);
    cmd.thrust = saturate_thrust(
        cmd.thrust + params.mass * params.pos_i * integral_, params);
  }
  return cmd;
}

VehicleCommand VelocityController::update(const VehicleState& state, const Vec3& velocity,
                                          double yaw_rate, const VehicleParams& params, double dt) {
  const Vec3 error = velocity - state.velocity;
  if (params.vel_i > 0.0) {
    // Conditional integration: only near steady tracking, so manoeuvres do not wind up.
    Vec3 accumulate = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
      if (std::abs(error[i]) < kIntegrationBand) accumulate[i] = error[i] * dt;
    }
    integral_ = clamp_norm(integral_ + accumulate, kMaxIntegralAccel / params.vel_i);
  }
  const Vec3 accel = params.vel_p * error + params.vel_i * integral_;
  VehicleCommand cmd;
  cmd.thrust = saturate_thrust(params.mass * (accel + Vec3(0.0, 0.0, kGravity)), params);
  cmd.rate_mode = true;
  cmd.yaw_rate = yaw_rate;
  return cmd;
}

VehicleState step(const VehicleState& state, const VehicleCommand& command,
                  const Disturbance& disturbance, const Vec3& wind, const VehicleParams& params,
                  double dt) {
  if (!(dt > 0.0 && dt <= 0.02)) {
    throw Error(ErrorCode::kInvalidArgument, "vehicle step: dt must be in (0, 0.02]");
  }
  VehicleState next = state;
  const Vec3 thrust = saturate_thrust(command.thrust, params);
  const Vec3 drag = params.drag * (wind - state.velocity);
  const Vec3 accel =
      (thrust + disturbance.force + drag) / params.mass - Vec3(0.0, 0.0, kGravity);

  next.velocity = state.velocity + accel * dt;
  next.pose.position = state.pose.position + next.velocity * dt;

  const double yaw_rate = command.rate_mode
                              ? command.yaw_rate
                              : params.yaw_p * wrap_angle(command.yaw - state.pose.yaw());
  next.body_rates = Vec3(0.0, 0.0, yaw_rate);
  next.pose.attitude = integrate_attitude(state.pose.attitude, next.body_rates, dt);
  next.commanded_thrust = thrust.norm() / kGramForce;
  return next;
}

WindModel::WindModel(Vec3 ambient, double gust_sigma, double gust_tau, std::uint64_t seed,
                     double gust_cap)
    : ambient_(std::move(ambient)),
      sigma_(gust_sigma),
      tau_(gust_tau),
      cap_(gust_cap),
      rng_(seed) {
  if (!(gust_sigma >= 0.0) || !(gust_tau > 0.0) || !(gust_cap >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "wind: sigma >= 0, tau > 0, cap >= 0 required");
  }
}

Vec3 WindModel::sample(double dt) {
  if (sigma_ > 0.0) {
    const double diffusion = sigma_ * std::sqrt(2.0 * dt / tau_);
    Vec3 noise;
    for (int i = 0; i < 3; ++i) noise[i] = normal_(rng_);
    gust_ = clamp_norm(gust_ - gust_ * (dt / tau_) + diffusion * noise, cap_);
  }
  return ambient_ + gust_;
}

const char* to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kHV: return "H-V";
    case TrajectoryKind::kHH: return "H-H";
    case TrajectoryKind::kVV: return "V-V";
    case TrajectoryKind::kVH: return "V-H";
  }
  return "?";
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  for (TrajectoryKind k : kAllTrajectoryKinds) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown trajectory kind '" + name + "'");
}

Vec3 docking_point(const Vec3& start, const Vec3& receiver_point, const StandoffGeometry& standoff,
                   const Vec3& dock_direction) {
  Vec3 dir(dock_direction.x(), dock_direction.y(), 0.0);
  if (dir.norm() < 1e-12) dir = Vec3(start.x() - receiver_point.x(), start.y() - receiver_point.y(), 0.0);
  if (dir.norm() < 1e-12) dir = -Vec3::UnitX();
  dir.normalize();
  return receiver_point + standoff.horizontal * dir + Vec3(0.0, 0.0, standoff.vertical);
}

std::vector<Vec3> plan_trajectory(TrajectoryKind kind, const Vec3& start,
                                  const Vec3& receiver_point, const StandoffGeometry& standoff,
                                  const Vec3& dock_direction) {
  if (start.z() < 0.0) throw Error(ErrorCode::kUnreachableTarget, "start is below ground");
  const Vec3 dock = docking_point(start, receiver_point, standoff, dock_direction);
  if (receiver_point.z() < 0.0 || dock.z() < 0.0) {
    throw Error(ErrorCode::kUnreachableTarget, "target is below ground");
  }
  if ((start - dock).norm() < 1e-9) return {dock};

  const Vec3 over_receiver(receiver_point.x(), receiver_point.y(), start.z());
  std::vector<Vec3> wps;
  switch (kind) {
    case TrajectoryKind::kVH:
      wps = {Vec3(start.x(), start.y(), dock.z()), dock};
      break;
    case TrajectoryKind::kHV:
      wps = {over_receiver, dock};
      break;
    case TrajectoryKind::kHH:
      wps = {over_receiver, Vec3(dock.x(), dock.y(), start.z())};
      break;
    case TrajectoryKind::kVV:
      wps = {Vec3(start.x(), start.y(), 0.5 * (start.z() + dock.z())),
             Vec3(start.x(), start.y(), dock.z())};
      break;
  }
  if ((wps.back() - dock).norm() > 1e-9) wps.push_back(dock);
  // Drop zero-length legs so a start already on a leg does not stall.
  std::vector<Vec3> out;
  Vec3 prev = start;
  for (const Vec3& w : wps) {
    if ((w - prev).norm() > 1e-9) out.push_back(w);
    prev = w;
  }
  if (out.empty()) out.push_back(dock);
  return out;
}

WaypointFollower::WaypointFollower(Vec3 start, std::vector<Vec3> waypoints, double speed)
    : current_(std::move(start)), waypoints_(std::move(waypoints)), speed_(speed) {
  if (!(speed > 0.0)) throw Error(ErrorCode::kInvalidArgument, "follower speed must be positive");
}

Vec3 WaypointFollower::advance(double dt) {
  double budget = speed_ * dt;
  while (index_ < waypoints_.size() && budget > 0.0) {
    const Vec3 delta = waypoints_[index_] - current_;
    const double dist = delta.norm();
    if (dist <= budget) {
      current_ = waypoints_[index_++];
      budget -= dist;
    } else {
      current_ += delta * (budget / dist);
      budget = 0.0;
    }
  }
  return current_;
}

double displacement_metric(const std::vector<Vec3>& trace, const Vec3& reference) {
  if (trace.empty()) throw Error(ErrorCode::kEmptyTrace, "displacement_metric on an empty trace");
  double worst = 0.0;
  for (const Vec3& p : trace) {
    worst = std::max(worst, std::hypot(p.x() - reference.x(), p.y() - reference.y()));
  }
  return worst;
}

}  // namespace aerobridge
