#include "aerobridge/perception.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/SVD>

#include "aerobridge/error.hpp"

namespace aerobridge {
namespace {

constexpr double kMinCornerArea = 4.0;  // px^2

double quad_area(const std::array<Pixel, 4>& c) {
  double twice = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Pixel& a = c[i];
    const Pixel& b = c[(i + 1) % 4];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

// Similarity moving the centroid to the origin with mean distance sqrt(2).
Mat3 normalizing_transform(const std::array<Eigen::Vector2d, 4>& pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= 4.0;
  double dist = 0.0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= 4.0;
  if (!(dist > 0.0)) throw Error(ErrorCode::kNumericalFailure, "coincident homography points");
  const double s = std::sqrt(2.0) / dist;
  Mat3 t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

Mat3 homography_dlt(const std::array<Eigen::Vector2d, 4>& src,
                    const std::array<Eigen::Vector2d, 4>& dst) {
  const Mat3 ts = normalizing_transform(src);
  const Mat3 td = normalizing_transform(dst);
  Eigen::Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const Vec3 s = ts * Vec3(src[i].x(), src[i].y(), 1.0);
    const Vec3 d = td * Vec3(dst[i].x(), dst[i].y(), 1.0);
    const double u = d.x() / d.z();
    const double v = d.y() / d.z();
    a.row(2 * i) << 0, 0, 0, -s.x(), -s.y(), -1, v * s.x(), v * s.y(), v;
    a.row(2 * i + 1) << s.x(), s.y(), 1, 0, 0, 0, -u * s.x(), -u * s.y(), -u;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(7) > 1e-10 * sv(0))) {
    throw Error(ErrorCode::kNumericalFailure, "homography system is rank-deficient");
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return td.inverse() * hn * ts;
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

}  // namespace

const char* to_string(MarkerId id) {
  switch (id) {
    case MarkerId::kCenter: return "center";
    case MarkerId::kFront: return "front";
    case MarkerId::kBack: return "back";
    case MarkerId::kLeft: return "left";
    case MarkerId::kRight: return "right";
  }
  return "?";
}

const char* to_string(Association a) {
  switch (a) {
    case Association::kAuto: return "auto";
    case Association::kFrontBack: return "Front-Back";
    case Association::kLeftBack: return "Left-Back";
    case Association::kRightBack: return "Right-Back";
    case Association::kOtherPair: return "other";
    case Association::kNone: return "none";
  }
  return "?";
}

double CmpLayout::side(MarkerId id) const {
  return id == MarkerId::kCenter ? center_side : satellite_side;
}

Vec3 CmpLayout::offset(MarkerId id) const {
  switch (id) {
    case MarkerId::kCenter: return Vec3::Zero();
    case MarkerId::kFront: return Vec3(satellite_offset, 0.0, 0.0);
    case MarkerId::kBack: return Vec3(-satellite_offset, 0.0, 0.0);
    case MarkerId::kLeft: return Vec3(0.0, satellite_offset, 0.0);
    case MarkerId::kRight: return Vec3(0.0, -satellite_offset, 0.0);
  }
  return Vec3::Zero();
}

bool CmpLayout::is_valid() const {
  return center_side > 0.0 && satellite_side > 0.0 &&
         satellite_offset > 0.5 * (center_side + satellite_side);
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, skew, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

bool CameraIntrinsics::is_valid() const {
  return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 && cx < width &&
         cy >= 0.0 && cy < height && fps > 0.0;
}

FrameTransform CameraMount::camera_in_body() const {
  const double s = std::sin(tilt);
  const double c = std::cos(tilt);
  FrameTransform tf;
  tf.rotation.col(0) = Vec3(0.0, -1.0, 0.0);
  tf.rotation.col(1) = Vec3(-c, 0.0, -s);
  tf.rotation.col(2) = Vec3(s, 0.0, -c);
  tf.translation = offset;
  return tf;
}

bool CameraMount::is_valid() const { return tilt >= 0.0 && tilt <= kPi / 2.0; }

Pixel project_point(const CameraIntrinsics& k, const FrameTransform& world_to_camera,
                    const Vec3& world_point) {
  const Vec3 p = transform_point(world_to_camera, world_point);
  if (!(p.z() > 1e-6)) throw Error(ErrorCode::kBehindCamera, "point is behind the camera");
  return {k.fx * p.x() / p.z() + k.skew * p.y() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

std::array<Eigen::Vector2d, 4> canonical_corners(double side) {
  const double h = 0.5 * side;
  return {Eigen::Vector2d(-h, h), Eigen::Vector2d(h, h), Eigen::Vector2d(h, -h),
          Eigen::Vector2d(-h, -h)};
}

std::vector<MarkerObservation> observe_markers(const Pose& ebs_pose, const CameraMount& mount,
                                               const Pose& rec_pose, const CmpLayout& layout,
                                               const CameraIntrinsics& intrinsics,
                                               double noise_sigma, std::mt19937_64& rng,
                                               const VisibilityEnvelope& envelope) {
  const FrameTransform camera_in_world = FrameTransform::from_pose(ebs_pose) * mount.camera_in_body();
  const FrameTransform world_to_camera = camera_in_world.inverse();
  const Mat3 rec_rot = rec_pose.attitude.normalized().toRotationMatrix();
  const Vec3 normal = rec_rot.col(2);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<MarkerObservation> out;
  out.reserve(kAllMarkers.size());
  for (MarkerId id : kAllMarkers) {
    MarkerObservation obs;
    obs.id = id;
    const double side = layout.side(id);
    const Vec3 center = rec_pose.position + rec_rot * layout.offset(id);
    const Vec3 line_of_sight = camera_in_world.translation - center;
    obs.range = line_of_sight.norm();
    const double facing = normal.dot(line_of_sight);
    obs.view_angle = std::acos(std::clamp(facing / obs.range, -1.0, 1.0));

    bool in_image = true;
    const auto square = canonical_corners(side);
    for (std::size_t i = 0; i < 4; ++i) {
      const Vec3 corner = center + rec_rot * Vec3(square[i].x(), square[i].y(), 0.0);
      if (!(transform_point(world_to_camera, corner).z() > 1e-6)) {
        in_image = false;
        break;
      }
      obs.corners[i] = project_point(intrinsics, world_to_camera, corner);
      const Pixel& px = obs.corners[i];
      in_image = in_image && px.x() >= 0.0 && px.x() < intrinsics.width && px.y() >= 0.0 &&
                 px.y() < intrinsics.height;
    }

    obs.detected = in_image && facing > 0.0 && obs.view_angle >= envelope.min_view_angle &&
                   obs.view_angle <= envelope.max_view_angle &&
                   obs.range <= envelope.max_range(side);
    if (obs.detected && noise_sigma > 0.0) {
      for (Pixel& px : obs.corners) {
        const double dx = noise(rng);
        const double dy = noise(rng);
        px += noise_sigma * Pixel(dx, dy);
      }
    }
    out.push_back(obs);
  }
  return out;
}

FrameTransform estimate_pose_from_marker(const MarkerObservation& obs,
                                         const CameraIntrinsics& intrinsics, double marker_side) {
  if (!(marker_side > 0.0)) throw Error(ErrorCode::kInvalidArgument, "marker side must be positive");
  if (!(quad_area(obs.corners) > kMinCornerArea)) {
    throw Error(ErrorCode::kDegenerateCorners, "marker corners enclose <= 4 px^2");
  }
  std::array<Eigen::Vector2d, 4> dst;
  for (std::size_t i = 0; i < 4; ++i) dst[i] = obs.corners[i];
  const Mat3 h = homography_dlt(canonical_corners(marker_side), dst);
  const Mat3 m = intrinsics.matrix().inverse() * h;

  const double n1 = m.col(0).norm();
  const double n2 = m.col(1).norm();
  if (!(n1 > 0.0 && n2 > 0.0)) throw Error(ErrorCode::kNumericalFailure, "degenerate homography");
  double lambda = 2.0 / (n1 + n2);
  if (m(2, 2) * lambda < 0.0) lambda = -lambda;

  Mat3 r;
  r.col(0) = lambda * m.col(0);
  r.col(1) = lambda * m.col(1);
  r.col(2) = r.col(0).cross(r.col(1));
  FrameTransform tf;
  tf.rotation = nearest_rotation(r);
  tf.translation = lambda * m.col(2);
  if (!tf.rotation.allFinite() || !tf.translation.allFinite()) {
    throw Error(ErrorCode::kNumericalFailure, "non-finite marker pose");
  }
  return tf;
}

FusedPose fuse_marker_poses(const std::vector<MarkerPose>& per_marker, const CmpLayout& layout,
                            Association preferred) {
  const FrameTransform* found[5] = {nullptr, nullptr, nullptr, nullptr, nullptr};
  for (const MarkerPose& mp : per_marker) found[static_cast<int>(mp.id)] = &mp.pose;
  const FrameTransform* center = found[static_cast<int>(MarkerId::kCenter)];
  if (center == nullptr) throw Error(ErrorCode::kNoCenterMarker, "center marker not observed");

  struct Pair {
    MarkerId a, b;
    Association tag;
  };
  static constexpr Pair kNamed[] = {{MarkerId::kFront, MarkerId::kBack, Association::kFrontBack},
                                    {MarkerId::kLeft, MarkerId::kBack, Association::kLeftBack},
                                    {MarkerId::kRight, MarkerId::kBack, Association::kRightBack}};
  static constexpr Pair kOthers[] = {{MarkerId::kFront, MarkerId::kLeft, Association::kOtherPair},
                                     {MarkerId::kFront, MarkerId::kRight, Association::kOtherPair},
                                     {MarkerId::kLeft, MarkerId::kRight, Association::kOtherPair},
                                     {MarkerId::kFront, MarkerId::kCenter, Association::kOtherPair},
                                     {MarkerId::kBack, MarkerId::kCenter, Association::kOtherPair},
                                     {MarkerId::kLeft, MarkerId::kCenter, Association::kOtherPair},
                                     {MarkerId::kRight, MarkerId::kCenter, Association::kOtherPair}};
  std::vector<Pair> order;
  for (const Pair& p : kNamed) {
    if (p.tag == preferred) order.push_back(p);
  }
  for (const Pair& p : kNamed) {
    if (p.tag != preferred) order.push_back(p);
  }
  for (const Pair& p : kOthers) order.push_back(p);

  // Small markers give reliable bearings but poor depth, so each marker
  // position is re-intersected along its line of sight with the center
  // marker's plane.
  const Vec3 z = center->rotation.col(2);
  const double plane = z.dot(center->translation);
  Vec3 position[5];
  for (int i = 0; i < 5; ++i) {
    if (found[i] == nullptr) continue;
    const Vec3& t = found[i]->translation;
    const double denom = z.dot(t);
    position[i] = std::abs(denom) > 1e-9 * t.norm() ? Vec3(t * (plane / denom)) : t;
  }

  FusedPose fused;
  fused.receiver_in_camera.rotation = center->rotation;
  for (const Pair& p : order) {
    const FrameTransform* a = found[static_cast<int>(p.a)];
    const FrameTransform* b = found[static_cast<int>(p.b)];
    if (a == nullptr || b == nullptr) continue;
    Vec3 m = position[static_cast<int>(p.a)] - position[static_cast<int>(p.b)];
    m -= z * z.dot(m);
    if (!(m.norm() > 1e-9)) continue;
    m.normalize();
    const Vec3 v = layout.offset(p.a) - layout.offset(p.b);
    const double phi = std::atan2(v.y(), v.x());
    const Vec3 x = (std::cos(phi) * m - std::sin(phi) * z.cross(m)).normalized();
    fused.receiver_in_camera.rotation.col(0) = x;
    fused.receiver_in_camera.rotation.col(1) = z.cross(x);
    fused.receiver_in_camera.rotation.col(2) = z;
    fused.association = p.tag;
    fused.heading_defined = true;
    break;
  }

  Vec3 origin = Vec3::Zero();
  double weight = 0.0;
  for (const MarkerPose& mp : per_marker) {
    const double w = layout.side(mp.id);
    origin += w * (position[static_cast<int>(mp.id)] -
                   fused.receiver_in_camera.rotation * layout.offset(mp.id));
    weight += w;
  }
  fused.receiver_in_camera.translation = origin / weight;
  fused.markers_used = static_cast<int>(per_marker.size());
  return fused;
}

AlignmentErrors alignment_errors(const Vec3& est_position, double est_heading,
                                 const Vec3& ideal_position, double ideal_heading) {
  return {(est_position - ideal_position).norm(),
          std::abs(rad2deg(wrap_angle(est_heading - ideal_heading)))};
}

AlignmentErrors alignment_errors(const Pose& est, const Pose& ideal) {
  return alignment_errors(est.position, est.yaw(), ideal.position, ideal.yaw());
}

FrameTransform refine_receiver_pose(const FrameTransform& initial,
                                    const std::vector<MarkerObservation>& observations,
                                    const CmpLayout& layout, const CameraIntrinsics& k,
                                    int max_iterations) {
  FrameTransform est = initial;
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
    for (const MarkerObservation& obs : observations) {
      const auto square = canonical_corners(layout.side(obs.id));
      for (std::size_t i = 0; i < 4; ++i) {
        const Vec3 body = layout.offset(obs.id) + Vec3(square[i].x(), square[i].y(), 0.0);
        const Vec3 rotated = est.rotation * body;
        const Vec3 p = rotated + est.translation;
        if (!(p.z() > 1e-6)) throw Error(ErrorCode::kNumericalFailure, "refinement left the view");
        const double iz = 1.0 / p.z();
        Eigen::Matrix<double, 2, 3> dproj;
        dproj << k.fx * iz, k.skew * iz, -(k.fx * p.x() + k.skew * p.y()) * iz * iz, 0.0,
            k.fy * iz, -k.fy * p.y() * iz * iz;
        Mat3 skew_neg;
        skew_neg << 0.0, rotated.z(), -rotated.y(), -rotated.z(), 0.0, rotated.x(), rotated.y(),
            -rotated.x(), 0.0;
        Eigen::Matrix<double, 2, 6> j;
        j.leftCols<3>() = dproj * skew_neg;
        j.rightCols<3>() = dproj;
        const Eigen::Vector2d predicted(k.fx * p.x() * iz + k.skew * p.y() * iz + k.cx,
                                        k.fy * p.y() * iz + k.cy);
        const Eigen::Vector2d r = obs.corners[i] - predicted;
        jtj += j.transpose() * j;
        jtr += j.transpose() * r;
      }
    }
    const Eigen::Matrix<double, 6, 1> delta = jtj.ldlt().solve(jtr);
    if (!delta.allFinite()) throw Error(ErrorCode::kNumericalFailure, "refinement diverged");
    const Vec3 w = delta.head<3>();
    if (w.norm() > 0.0) {
      est.rotation = Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix() * est.rotation;
    }
    est.translation += delta.tail<3>();
    if (delta.norm() < 1e-12) break;
  }
  est.rotation = nearest_rotation(est.rotation);
  return est;
}

std::optional<FusedPose> perceive(const std::vector<MarkerObservation>& observations,
                                  const CmpLayout& layout, const CameraIntrinsics& intrinsics,
                                  Association preferred) {
  std::vector<MarkerPose> poses;
  std::vector<MarkerObservation> usable;
  bool have_center = false;
  for (const MarkerObservation& obs : observations) {
    if (!obs.detected) continue;
    try {
      poses.push_back({obs.id, estimate_pose_from_marker(obs, intrinsics, layout.side(obs.id))});
      usable.push_back(obs);
      have_center = have_center || obs.id == MarkerId::kCenter;
    } catch (const Error&) {
      // An unusable marker is treated as not detected.
    }
  }
  if (!have_center) return std::nullopt;
  FusedPose fused = fuse_marker_poses(poses, layout, preferred);
  if (!fused.heading_defined) return fused;

  if (preferred != Association::kAuto && fused.association == preferred) {
    const MarkerId second = preferred == Association::kFrontBack  ? MarkerId::kFront
                            : preferred == Association::kLeftBack ? MarkerId::kLeft
                                                                  : MarkerId::kRight;
    std::erase_if(usable, [&](const MarkerObservation& o) {
      return o.id != MarkerId::kCenter && o.id != MarkerId::kBack && o.id != second;
    });
  }
  try {
    fused.receiver_in_camera = refine_receiver_pose(fused.receiver_in_camera, usable, layout,
                                                    intrinsics);
    fused.markers_used = static_cast<int>(usable.size());
  } catch (const Error&) {
    // Keep the closed-form fusion when refinement is not usable.
  }
  return fused;
}

}  // namespace aerobridge
