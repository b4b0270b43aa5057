#include <doctest.h>

#include <cmath>
#include <random>

#include "aerobridge/error.hpp"
#include "aerobridge/perception.hpp"

using namespace aerobridge;

namespace {

const CmpLayout kLayout;
const CameraIntrinsics kCamera;
const CameraMount kMount;

// EBS placed so the center marker is seen at `range` and `view` (rad) from
// azimuth `azimuth`, with the EBS nose pointing at the receiver.
Pose ebs_looking_at(const Pose& rec, double range, double view, double azimuth) {
  const Vec3 dir(std::cos(azimuth), std::sin(azimuth), 0.0);
  Pose p;
  p.position = rec.position - range * std::sin(view) * dir + Vec3(0, 0, range * std::cos(view));
  p.attitude = quaternion_from_yaw(azimuth);
  return p;
}

FrameTransform world_to_camera(const Pose& ebs) {
  return (FrameTransform::from_pose(ebs) * kMount.camera_in_body()).inverse();
}

FrameTransform true_marker_in_camera(const Pose& ebs, const Pose& rec, MarkerId id) {
  FrameTransform marker = FrameTransform::from_pose(rec);
  marker.translation += marker.rotation * kLayout.offset(id);
  return world_to_camera(ebs) * marker;
}

const MarkerObservation& find(const std::vector<MarkerObservation>& obs, MarkerId id) {
  for (const auto& o : obs) {
    if (o.id == id) return o;
  }
  throw Error(ErrorCode::kInvalidArgument, "marker missing");
}

int detected_count(const std::vector<MarkerObservation>& obs) {
  int n = 0;
  for (const auto& o : obs) n += o.detected ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("projection") {
  const FrameTransform identity;
  const Pixel p = project_point(kCamera, identity, Vec3(0.1, 0, 1));
  CHECK(p.x() == doctest::Approx(380.0));
  CHECK(p.y() == doctest::Approx(240.0));
  const Pixel c = project_point(kCamera, identity, Vec3(0, 0, 3.7));
  CHECK(c.x() == kCamera.cx);
  CHECK(c.y() == kCamera.cy);
  CHECK_THROWS_AS(project_point(kCamera, identity, Vec3(0, 0, -1)), Error);
}

TEST_CASE("layout and camera defaults") {
  CHECK(kLayout.is_valid());
  CHECK(kCamera.is_valid());
  CHECK(kMount.is_valid());
  CHECK(kMount.camera_in_body().is_valid());
  CHECK(kLayout.offset(MarkerId::kLeft).isApprox(Vec3(0, 0.12, 0)));
  CHECK(kLayout.side(MarkerId::kCenter) == 0.070);
  CHECK(VisibilityEnvelope{}.max_range(0.030) == doctest::Approx(3.0 * 0.03 / 0.07));
}

TEST_CASE("detection envelope") {
  const Pose rec{Vec3(2, 1, 5), quaternion_from_yaw(0.3)};
  std::mt19937_64 rng(1);
  SUBCASE("close at 45 degrees sees every marker") {
    const auto obs = observe_markers(ebs_looking_at(rec, 0.5, deg2rad(45), 0.3), kMount, rec,
                                     kLayout, kCamera, 0.0, rng);
    CHECK(detected_count(obs) == 5);
    CHECK(find(obs, MarkerId::kCenter).range == doctest::Approx(0.5));
    CHECK(rad2deg(find(obs, MarkerId::kCenter).view_angle) == doctest::Approx(45.0));
  }
  SUBCASE("2 m sees only the center") {
    const auto obs = observe_markers(ebs_looking_at(rec, 2.0, deg2rad(45), 0.3), kMount, rec,
                                     kLayout, kCamera, 0.0, rng);
    CHECK(find(obs, MarkerId::kCenter).detected);
    CHECK(detected_count(obs) == 1);
  }
  SUBCASE("beyond the range limit") {
    const auto obs = observe_markers(ebs_looking_at(rec, 3.5, deg2rad(45), 0.3), kMount, rec,
                                     kLayout, kCamera, 0.0, rng);
    CHECK_FALSE(find(obs, MarkerId::kCenter).detected);
  }
  SUBCASE("too steep a view angle") {
    const auto obs = observe_markers(ebs_looking_at(rec, 0.8, deg2rad(20), 0.3), kMount, rec,
                                     kLayout, kCamera, 0.0, rng);
    CHECK(detected_count(obs) == 0);
  }
  SUBCASE("marker facing away") {
    const Pose flipped{rec.position, UnitQuaternion(Eigen::AngleAxisd(kPi, Vec3::UnitX()))};
    const auto obs = observe_markers(ebs_looking_at(rec, 0.6, deg2rad(45), 0.3), kMount, flipped,
                                     kLayout, kCamera, 0.0, rng);
    CHECK(detected_count(obs) == 0);
  }
}

TEST_CASE("corner noise is reproducible") {
  const Pose rec{Vec3(0, 0, 5), UnitQuaternion::Identity()};
  const Pose ebs = ebs_looking_at(rec, 0.6, deg2rad(45), 0.0);
  std::mt19937_64 a(5), b(5), c(6);
  const auto oa = observe_markers(ebs, kMount, rec, kLayout, kCamera, 0.5, a);
  const auto ob = observe_markers(ebs, kMount, rec, kLayout, kCamera, 0.5, b);
  const auto oc = observe_markers(ebs, kMount, rec, kLayout, kCamera, 0.5, c);
  for (std::size_t i = 0; i < oa.size(); ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(oa[i].corners[k] == ob[i].corners[k]);
    }
  }
  CHECK_FALSE(oa[0].corners[0] == oc[0].corners[0]);
}

TEST_CASE("pose from a frontal marker") {
  MarkerObservation obs;
  obs.detected = true;
  const auto sq = canonical_corners(0.07);
  for (std::size_t i = 0; i < 4; ++i) {
    obs.corners[i] = project_point(kCamera, {}, Vec3(sq[i].x(), sq[i].y(), 1.0));
  }
  const FrameTransform tf = estimate_pose_from_marker(obs, kCamera, 0.07);
  CHECK((tf.translation - Vec3(0, 0, 1)).norm() < 1e-9);
  CHECK(tf.rotation.isApprox(Mat3::Identity(), 1e-9));

  CHECK_THROWS_AS(estimate_pose_from_marker(obs, kCamera, 0.0), Error);
  MarkerObservation flat = obs;
  for (auto& c : flat.corners) c = Pixel(100, 100);
  try {
    estimate_pose_from_marker(flat, kCamera, 0.07);
    FAIL("degenerate corners accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateCorners);
  }
}

TEST_CASE("noise-free pose recovery over random poses") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> range(0.3, 2.8), view(deg2rad(31), deg2rad(54)),
      yaw(-kPi, kPi), pos(-50, 50);
  std::mt19937_64 unused(0);
  int checked = 0;
  double worst_t = 0.0, worst_r = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double rx = pos(rng), ry = pos(rng), rz = 5.0 + 0.1 * pos(rng);
    const double rec_yaw = yaw(rng);
    const double r = range(rng), v = view(rng), az = yaw(rng);
    const Pose rec{Vec3(rx, ry, rz), quaternion_from_yaw(rec_yaw)};
    const Pose ebs = ebs_looking_at(rec, r, v, az);
    const auto obs = observe_markers(ebs, kMount, rec, kLayout, kCamera, 0.0, unused);
    const MarkerObservation& center = find(obs, MarkerId::kCenter);
    REQUIRE(center.detected);
    const FrameTransform est = estimate_pose_from_marker(center, kCamera, kLayout.center_side);
    const FrameTransform truth = true_marker_in_camera(ebs, rec, MarkerId::kCenter);
    worst_t = std::max(worst_t, (est.translation - truth.translation).norm());
    worst_r = std::max(worst_r, rotation_angle(est.rotation.transpose() * truth.rotation));
    ++checked;
  }
  CHECK(checked == 1000);
  CHECK(worst_t < 1e-6);
  CHECK(worst_r < 1e-6);
}

TEST_CASE("fusion") {
  const Pose rec{Vec3(1, -2, 6), quaternion_from_yaw(-0.4)};
  const Pose ebs = ebs_looking_at(rec, 0.6, deg2rad(45), -0.4);
  std::mt19937_64 rng(3);
  const auto obs = observe_markers(ebs, kMount, rec, kLayout, kCamera, 0.0, rng);
  const FrameTransform truth = true_marker_in_camera(ebs, rec, MarkerId::kCenter);

  SUBCASE("all five markers") {
    REQUIRE(detected_count(obs) == 5);
    const auto fused = perceive(obs, kLayout, kCamera);
    REQUIRE(fused.has_value());
    CHECK(fused->heading_defined);
    CHECK(fused->association == Association::kFrontBack);
    CHECK(fused->markers_used == 5);
    CHECK((fused->receiver_in_camera.translation - truth.translation).norm() < 1e-6);
    CHECK(rotation_angle(fused->receiver_in_camera.rotation.transpose() * truth.rotation) < 1e-6);
  }
  SUBCASE("preferred pair") {
    const auto fused = perceive(obs, kLayout, kCamera, Association::kLeftBack);
    REQUIRE(fused.has_value());
    CHECK(fused->association == Association::kLeftBack);
    CHECK(fused->markers_used == 3);
    CHECK((fused->receiver_in_camera.translation - truth.translation).norm() < 1e-6);
  }
  SUBCASE("center only leaves heading undefined") {
    std::vector<MarkerObservation> only{find(obs, MarkerId::kCenter)};
    const auto fused = perceive(only, kLayout, kCamera);
    REQUIRE(fused.has_value());
    CHECK_FALSE(fused->heading_defined);
    CHECK(fused->association == Association::kNone);
    CHECK((fused->receiver_in_camera.translation - truth.translation).norm() < 1e-6);
  }
  SUBCASE("no center") {
    std::vector<MarkerObservation> rest;
    for (const auto& o : obs) {
      if (o.id != MarkerId::kCenter) rest.push_back(o);
    }
    CHECK_FALSE(perceive(rest, kLayout, kCamera).has_value());
    std::vector<MarkerPose> poses{{MarkerId::kFront, truth}};
    try {
      fuse_marker_poses(poses, kLayout);
      FAIL("fusion without the center marker");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNoCenterMarker);
    }
  }
}

TEST_CASE("satellites improve the noisy estimate") {
  const Pose rec{Vec3(0, 0, 5), UnitQuaternion::Identity()};
  const Pose ebs = ebs_looking_at(rec, 0.6, deg2rad(45), 0.0);
  const FrameTransform truth = true_marker_in_camera(ebs, rec, MarkerId::kCenter);
  std::mt19937_64 rng(17);
  double sum_all = 0.0, sum_center = 0.0;
  int n = 0;
  for (int i = 0; i < 500; ++i) {
    const auto obs = observe_markers(ebs, kMount, rec, kLayout, kCamera, 0.5, rng);
    const auto all = perceive(obs, kLayout, kCamera);
    const auto center = perceive({find(obs, MarkerId::kCenter)}, kLayout, kCamera);
    if (!all || !center) continue;
    sum_all += (all->receiver_in_camera.translation - truth.translation).norm();
    sum_center += (center->receiver_in_camera.translation - truth.translation).norm();
    ++n;
  }
  REQUIRE(n > 450);
  const double mean_all = sum_all / n;
  CHECK(mean_all < sum_center / n);
  // Half a pixel at about half a metre is a centimetre-scale error.
  CHECK(mean_all < 0.02);
  CHECK(mean_all > 1e-4);
}

TEST_CASE("alignment errors") {
  const AlignmentErrors a = alignment_errors(Vec3(0.03, 0.04, 0), 0.0, Vec3::Zero(), 0.0);
  CHECK(a.e == doctest::Approx(0.05));
  CHECK(a.alpha == 0.0);
  const AlignmentErrors b = alignment_errors(Vec3::Zero(), deg2rad(-30), Vec3::Zero(), deg2rad(-50));
  CHECK(b.alpha == doctest::Approx(20.0));
  const AlignmentErrors c = alignment_errors(Vec3::Zero(), deg2rad(170), Vec3::Zero(), deg2rad(-170));
  CHECK(c.alpha == doctest::Approx(20.0));
  const Pose p{Vec3(1, 2, 3), quaternion_from_yaw(0.2)};
  const AlignmentErrors d = alignment_errors(p, p);
  CHECK(d.e == 0.0);
  CHECK(d.alpha == doctest::Approx(0.0));
}

TEST_CASE("names") {
  CHECK(std::string(to_string(MarkerId::kBack)) == "back");
  CHECK(std::string(to_string(Association::kRightBack)) == "Right-Back");
}
