#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace aerobridge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Hamilton unit quaternion. Eigen stores (x, y, z, w) internally; public
/// helpers in this header always present components scalar-first (w, x, y, z).
using UnitQuaternion = Eigen::Quaterniond;

/// Quaternion rate in (w, x, y, z) order.
using QuaternionRate = Eigen::Vector4d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGravity = 9.81;
inline constexpr double kEarthRadius = 6371000.0;
inline constexpr double kGramForce = kGravity * 1e-3;  // newtons per gF

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double rad);

struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

struct Pose {
  Vec3 position = Vec3::Zero();
  UnitQuaternion attitude = UnitQuaternion::Identity();

  double yaw() const;
};

struct FrameTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static FrameTransform from_pose(const Pose& pose);

  FrameTransform inverse() const;
  FrameTransform operator*(const FrameTransform& rhs) const;
  bool is_valid(double tol = 1e-9) const;
};

struct GpsCoordinate {
  double latitude = 0.0;   // rad
  double longitude = 0.0;  // rad
  double altitude = 0.0;   // m above the reference sphere
};

UnitQuaternion quaternion_from_yaw(double yaw);
Mat3 rotation_z(double yaw);

// Standard Euler-rate kinematic map (ZYX convention). Throws PitchSingularity
// within 1e-6 rad of +-pi/2 pitch.
Vec3 euler_rates_to_body_rates(const EulerAngles& angles, const EulerAngles& rates);

/// Kinematic derivative 0.5 * q (x) (0, omega), body-frame omega.
QuaternionRate quaternion_derivative(const UnitQuaternion& q, const Vec3& omega);

/// One step of the attitude kinematics followed by renormalization. Uses the
/// closed-form exponential of the constant-rate step, so a constant omega is
/// integrated without truncation error.
UnitQuaternion integrate_attitude(const UnitQuaternion& q, const Vec3& omega, double dt);

Vec3 transform_point(const FrameTransform& tf, const Vec3& p);

Vec3 gps_to_ecef(const GpsCoordinate& g, double earth_radius = kEarthRadius);

/// Geodetic anchor plus the attitude-rotated relative offset.
Vec3 compose_global_position(const GpsCoordinate& anchor, const UnitQuaternion& attitude,
                             const Vec3& relative_offset, double earth_radius = kEarthRadius);

/// Angle of the rotation R (radians, [0, pi]).
double rotation_angle(const Mat3& r);

}  // namespace aerobridge
