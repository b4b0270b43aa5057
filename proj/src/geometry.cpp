#include "aerobridge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aerobridge/error.hpp"

namespace aerobridge {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kPitchSingularity: return "PitchSingularity";
    case ErrorCode::kNonPositiveGeometry: return "NonPositiveGeometry";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kUnreachableTarget: return "UnreachableTarget";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kDegenerateCorners: return "DegenerateCorners";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kNoCenterMarker: return "NoCenterMarker";
    case ErrorCode::kHeadingUndefined: return "HeadingUndefined";
    case ErrorCode::kNoFullSlot: return "NoFullSlot";
    case ErrorCode::kStateExplosion: return "StateExplosion";
    case ErrorCode::kStuckBattery: return "StuckBattery";
    case ErrorCode::kLatchLost: return "LatchLost";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

double wrap_angle(double rad) {
  double a = std::remainder(rad, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

double Pose::yaw() const {
  const Mat3 r = attitude.toRotationMatrix();
  return std::atan2(r(1, 0), r(0, 0));
}

FrameTransform FrameTransform::from_pose(const Pose& pose) {
  return {pose.attitude.normalized().toRotationMatrix(), pose.position};
}

FrameTransform FrameTransform::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

FrameTransform FrameTransform::operator*(const FrameTransform& rhs) const {
  return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

bool FrameTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

UnitQuaternion quaternion_from_yaw(double yaw) {
  return UnitQuaternion(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

Mat3 rotation_z(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

Vec3 euler_rates_to_body_rates(const EulerAngles& angles, const EulerAngles& rates) {
  if (std::abs(angles.pitch) >= kPi / 2.0 - 1e-6) {
    throw Error(ErrorCode::kPitchSingularity,
                "pitch " + std::to_string(angles.pitch) + " rad is at the Euler-rate singularity");
  }
  const double sphi = std::sin(angles.roll), cphi = std::cos(angles.roll);
  const double sth = std::sin(angles.pitch), cth = std::cos(angles.pitch);
  return {rates.roll - rates.yaw * sth,
          rates.pitch * cphi + rates.yaw * cth * sphi,
          rates.yaw * cth * cphi - rates.pitch * sphi};
}

QuaternionRate quaternion_derivative(const UnitQuaternion& q, const Vec3& omega) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double p = omega.x(), qr = omega.y(), r = omega.z();
  return 0.5 * QuaternionRate(-x * p - y * qr - z * r,
                              w * p + y * r - z * qr,
                              w * qr + z * p - x * r,
                              w * r + x * qr - y * p);
}

UnitQuaternion integrate_attitude(const UnitQuaternion& q, const Vec3& omega, double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) {
    throw Error(ErrorCode::kInvalidArgument, "integrate_attitude: dt must be in (0, 0.1]");
  }
  const double angle = omega.norm() * dt;
  if (angle == 0.0) return q.normalized();
  const UnitQuaternion step(Eigen::AngleAxisd(angle, omega / omega.norm()));
  return (q * step).normalized();
}

Vec3 transform_point(const FrameTransform& tf, const Vec3& p) {
  return tf.rotation * p + tf.translation;
}

Vec3 gps_to_ecef(const GpsCoordinate& g, double earth_radius) {
  const double r = earth_radius + g.altitude;
  const double cla = std::cos(g.latitude);
  return {r * cla * std::cos(g.longitude), r * cla * std::sin(g.longitude),
          r * std::sin(g.latitude)};
}

Vec3 compose_global_position(const GpsCoordinate& anchor, const UnitQuaternion& attitude,
                             const Vec3& relative_offset, double earth_radius) {
  return gps_to_ecef(anchor, earth_radius) + attitude.normalized() * relative_offset;
}

double rotation_angle(const Mat3& r) {
  const Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * axis.norm(), std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
}

}  // namespace aerobridge
