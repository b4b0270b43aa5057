#pragma once

#include <array>
#include <optional>
#include <random>
#include <vector>

#include "aerobridge/geometry.hpp"

namespace aerobridge {

enum class MarkerId { kCenter = 0, kFront, kBack, kLeft, kRight };

inline constexpr std::array<MarkerId, 5> kAllMarkers = {MarkerId::kCenter, MarkerId::kFront,
                                                        MarkerId::kBack, MarkerId::kLeft,
                                                        MarkerId::kRight};

const char* to_string(MarkerId id);

// Cross layout on the receiver top plate. Marker frames share the receiver
// body axes; the plate normal is body +z.
struct CmpLayout {
  double center_side = 0.070;     // m
  double satellite_side = 0.030;  // m
  double satellite_offset = 0.12; // m from the center along the body axes

  double side(MarkerId id) const;
  Vec3 offset(MarkerId id) const;  // receiver body frame
  bool is_valid() const;
};

struct CameraIntrinsics {
  double fx = 600.0;
  double fy = 600.0;
  double skew = 0.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  double fps = 30.0;

  Mat3 matrix() const;
  bool is_valid() const;
};

// Camera on the EBS body. The optical axis points down, pitched forward (body
// +x) by `tilt`; image x runs to body right.
struct CameraMount {
  double tilt = deg2rad(45.0);
  Vec3 offset = Vec3::Zero();  // camera position in the EBS body frame

  FrameTransform camera_in_body() const;
  bool is_valid() const;
};

/// Detection envelope. The maximum range scales with marker side.
struct VisibilityEnvelope {
  double min_view_angle = deg2rad(30.0);
  double max_view_angle = deg2rad(55.0);
  double reference_range = 3.0;   // m for a marker of reference_side
  double reference_side = 0.070;  // m

  double max_range(double side) const { return reference_range * side / reference_side; }
};

using Pixel = Eigen::Vector2d;

struct MarkerObservation {
  MarkerId id = MarkerId::kCenter;
  std::array<Pixel, 4> corners{};  // TL, TR, BR, BL of the canonical square
  bool detected = false;
  double range = 0.0;       // m, depth channel
  double view_angle = 0.0;  // rad between marker normal and line of sight
};

Pixel project_point(const CameraIntrinsics& intrinsics, const FrameTransform& world_to_camera,
                    const Vec3& world_point);

/// Marker-plane corner coordinates of a square of the given side, in the same
/// order as MarkerObservation::corners.
std::array<Eigen::Vector2d, 4> canonical_corners(double side);

std::vector<MarkerObservation> observe_markers(const Pose& ebs_pose, const CameraMount& mount,
                                               const Pose& rec_pose, const CmpLayout& layout,
                                               const CameraIntrinsics& intrinsics,
                                               double noise_sigma, std::mt19937_64& rng,
                                               const VisibilityEnvelope& envelope = {});

/// Homography-based pose of one marker in the camera frame
/// (p_camera = R p_marker + t).
FrameTransform estimate_pose_from_marker(const MarkerObservation& obs,
                                         const CameraIntrinsics& intrinsics, double marker_side);

enum class Association { kAuto, kFrontBack, kLeftBack, kRightBack, kOtherPair, kNone };

const char* to_string(Association a);

struct MarkerPose {
  MarkerId id;
  FrameTransform pose;  // marker in camera frame
};

struct FusedPose {
  FrameTransform receiver_in_camera;
  Association association = Association::kNone;
  bool heading_defined = false;
  int markers_used = 0;
};

/// Combines per-marker poses. The plate normal comes from the center marker,
/// heading from a satellite pair (Front-Back, then Left-Back, Right-Back, any
/// other pair). `preferred` forces a pair when both of its markers are present.
/// Throws NoCenterMarker.
FusedPose fuse_marker_poses(const std::vector<MarkerPose>& per_marker, const CmpLayout& layout,
                            Association preferred = Association::kAuto);

struct AlignmentErrors {
  double e = 0.0;      // m
  double alpha = 0.0;  // deg, [0, 180]
};

/// Euclidean position error and wrapped heading deviation.
AlignmentErrors alignment_errors(const Vec3& est_position, double est_heading,
                                 const Vec3& ideal_position, double ideal_heading);

AlignmentErrors alignment_errors(const Pose& est, const Pose& ideal);

/// Gauss-Newton refinement of the receiver pose against the reprojection error
/// of every corner of the given markers, all treated as one rigid target.
FrameTransform refine_receiver_pose(const FrameTransform& initial,
                                    const std::vector<MarkerObservation>& observations,
                                    const CmpLayout& layout, const CameraIntrinsics& intrinsics,
                                    int max_iterations = 10);

/// Detected observations -> per-marker poses -> fusion -> joint refinement.
/// With an explicit association only the center and that pair take part.
/// Markers whose pose recovery fails are skipped. Returns nothing when the
/// center is missing.
std::optional<FusedPose> perceive(const std::vector<MarkerObservation>& observations,
                                  const CmpLayout& layout, const CameraIntrinsics& intrinsics,
                                  Association preferred = Association::kAuto);

}  // namespace aerobridge
