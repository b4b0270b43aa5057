#include <doctest.h>

#include <cmath>

#include "aerobridge/error.hpp"
#include "aerobridge/vehicle.hpp"

using namespace aerobridge;

namespace {

VehicleState hovering_at(const Vec3& p) {
  VehicleState s;
  s.pose.position = p;
  return s;
}

bool same(const Vec3& a, const Vec3& b) { return (a - b).norm() < 1e-12; }

}  // namespace

TEST_CASE("position hold command") {
  const VehicleParams p;
  const VehicleState s = hovering_at(Vec3(1, 2, 10));
  const VehicleCommand hover = position_hold_command(s, s.pose.position, p);
  CHECK(same(hover.thrust, Vec3(0, 0, p.mass * kGravity)));
  const VehicleCommand climb = position_hold_command(s, Vec3(1, 2, 11), p);
  CHECK(climb.thrust.z() > hover.thrust.z());
  const VehicleCommand far = position_hold_command(s, Vec3(1, 2, 1000), p);
  CHECK(far.thrust.norm() <= p.max_thrust_newtons() + 1e-9);
}

TEST_CASE("equilibrium and force balance") {
  const VehicleParams p;
  PositionController ctrl;
  VehicleState s = hovering_at(Vec3(0, 0, 10));
  const Vec3 sp = s.pose.position;
  for (int i = 0; i < 1000; ++i) {
    s = step(s, ctrl.update(s, sp, 0.0, p, 0.01), {}, Vec3::Zero(), p, 0.01);
  }
  CHECK((s.pose.position - sp).norm() < 1e-3);
  CHECK(std::abs(s.commanded_thrust * kGramForce - p.mass * kGravity) <= 0.01 * p.mass * kGravity);

  for (double mass : {0.5, 1.0, 2.6, 3.2, 4.5}) {
    VehicleParams q;
    q.mass = mass;
    VehicleState h = hovering_at(Vec3(0, 0, 5));
    PositionController c;
    for (int i = 0; i < 500; ++i) h = step(h, c.update(h, Vec3(0, 0, 5), 0.0, q, 0.01), {}, Vec3::Zero(), q, 0.01);
    CHECK(std::abs(h.commanded_thrust * kGramForce - mass * kGravity) <= 0.01 * mass * kGravity);
  }
}

TEST_CASE("thrust deficit at hover is recovered") {
  const VehicleParams p;
  PositionController ctrl;
  VehicleState s = hovering_at(Vec3(0, 0, 10));
  Disturbance d;
  d.thrust_deficit_gf = 200.0;
  d.force = Vec3(0, 0, -200.0 * kGramForce);
  double lowest = 10.0;
  for (int i = 0; i < 3000; ++i) {
    s = step(s, ctrl.update(s, Vec3(0, 0, 10), 0.0, p, 0.01), d, Vec3::Zero(), p, 0.01);
    lowest = std::min(lowest, s.pose.position.z());
    if (i == 10) CHECK(s.velocity.z() < 0.0);
  }
  // The static PD droop is F / (m P); the integrator removes it.
  const double droop = 200.0 * kGramForce / (p.mass * p.pos_p);
  CHECK(lowest < 10.0 - 0.5 * droop);
  CHECK(std::abs(s.pose.position.z() - 10.0) < 0.01);
}

TEST_CASE("closed loop settles within 2 cm in 5 s") {
  const VehicleParams p;
  PositionController ctrl;
  VehicleState s = hovering_at(Vec3(0, 0, 10));
  const Vec3 sp(1.0, -0.5, 10.8);
  for (int i = 1; i <= 1500; ++i) {
    s = step(s, ctrl.update(s, sp, 0.0, p, 0.01), {}, Vec3::Zero(), p, 0.01);
    if (i >= 500) CHECK((s.pose.position - sp).norm() < 0.02);
  }

  VehicleState pd = hovering_at(Vec3(0, 0, 10));
  for (int i = 0; i < 500; ++i) pd = step(pd, position_hold_command(pd, sp, p), {}, Vec3::Zero(), p, 0.01);
  CHECK((pd.pose.position - sp).norm() < 0.02);
}

TEST_CASE("yaw follows the setpoint") {
  const VehicleParams p;
  PositionController ctrl;
  VehicleState s = hovering_at(Vec3(0, 0, 10));
  for (int i = 0; i < 500; ++i) s = step(s, ctrl.update(s, Vec3(0, 0, 10), 1.2, p, 0.01), {}, Vec3::Zero(), p, 0.01);
  CHECK(s.pose.yaw() == doctest::Approx(1.2).epsilon(1e-3));
  CHECK(std::abs(s.pose.attitude.norm() - 1.0) < 1e-12);
}

TEST_CASE("velocity controller tracks a request") {
  const VehicleParams p;
  VelocityController ctrl;
  VehicleState s = hovering_at(Vec3(0, 0, 10));
  for (int i = 0; i < 1000; ++i) {
    s = step(s, ctrl.update(s, Vec3(0.3, -0.2, 0.1), 0.0, p, 0.01), {}, Vec3(2, 0, 0), p, 0.01);
  }
  CHECK((s.velocity - Vec3(0.3, -0.2, 0.1)).norm() < 0.01);
}

TEST_CASE("step rejects bad time steps") {
  const VehicleParams p;
  CHECK_THROWS_AS(step({}, {}, {}, Vec3::Zero(), p, 0.0), Error);
  CHECK_THROWS_AS(step({}, {}, {}, Vec3::Zero(), p, 0.05), Error);
}

TEST_CASE("wind model") {
  SUBCASE("calm without gusts") {
    WindModel w(Vec3(4, 0, 0), 0.0, 2.0, 1);
    for (int i = 0; i < 10; ++i) CHECK(same(w.sample(0.01), Vec3(4, 0, 0)));
  }
  SUBCASE("gusts are capped and reproducible") {
    WindModel a(Vec3(1, 0, 0), 3.0, 0.5, 7, 4.0), b(Vec3(1, 0, 0), 3.0, 0.5, 7, 4.0);
    for (int i = 0; i < 5000; ++i) {
      const Vec3 x = a.sample(0.01);
      CHECK((x - Vec3(1, 0, 0)).norm() <= 4.0 + 1e-12);
      CHECK(x == b.sample(0.01));
    }
  }
  SUBCASE("different seeds differ") {
    WindModel a(Vec3::Zero(), 0.3, 2.0, 1), b(Vec3::Zero(), 0.3, 2.0, 2);
    CHECK_FALSE(a.sample(0.01) == b.sample(0.01));
  }
  CHECK_THROWS_AS(WindModel(Vec3::Zero(), -1.0, 2.0, 1), Error);
}

TEST_CASE("trajectory kinds round-trip by name") {
  for (TrajectoryKind k : kAllTrajectoryKinds) CHECK(trajectory_kind_from_string(to_string(k)) == k);
  CHECK(std::string(to_string(TrajectoryKind::kVH)) == "V-H");
  CHECK_THROWS_AS(trajectory_kind_from_string("X-Y"), Error);
}

TEST_CASE("plan_trajectory") {
  const Vec3 start(0, 0, 10), receiver(5, 0, 8);
  SUBCASE("V-H example") {
    const auto w = plan_trajectory(TrajectoryKind::kVH, start, receiver);
    REQUIRE(w.size() == 2);
    CHECK(same(w[0], Vec3(0, 0, 8.5)));
    CHECK(same(w[1], Vec3(4.5, 0, 8.5)));
  }
  SUBCASE("H-H first leg is horizontal") {
    const auto w = plan_trajectory(TrajectoryKind::kHH, start, receiver);
    REQUIRE(w.size() >= 2);
    CHECK(w[0].z() == start.z());
    CHECK(same(w.back(), Vec3(4.5, 0, 8.5)));
  }
  SUBCASE("H-V aligns horizontally first") {
    const auto w = plan_trajectory(TrajectoryKind::kHV, start, receiver);
    REQUIRE(w.size() == 2);
    CHECK(w[0].z() == start.z());
    CHECK(same(w.back(), Vec3(4.5, 0, 8.5)));
  }
  SUBCASE("V-V moves vertically first") {
    const auto w = plan_trajectory(TrajectoryKind::kVV, start, receiver);
    REQUIRE(w.size() >= 2);
    CHECK(w[0].x() == start.x());
    CHECK(w[0].y() == start.y());
    CHECK(same(w.back(), Vec3(4.5, 0, 8.5)));
  }
  SUBCASE("start at the docking point") {
    for (TrajectoryKind k : kAllTrajectoryKinds) {
      const auto w = plan_trajectory(k, Vec3(4.5, 0, 8.5), receiver);
      REQUIRE(w.size() == 1);
      CHECK(same(w[0], Vec3(4.5, 0, 8.5)));
    }
  }
  SUBCASE("explicit docking direction") {
    const auto w = plan_trajectory(TrajectoryKind::kVH, start, receiver, {}, Vec3(0, 1, 0));
    CHECK(same(w.back(), Vec3(5, 0.5, 8.5)));
  }
  SUBCASE("unreachable") {
    CHECK_THROWS_AS(plan_trajectory(TrajectoryKind::kVH, start, Vec3(5, 0, -2)), Error);
    CHECK_THROWS_AS(plan_trajectory(TrajectoryKind::kVH, Vec3(0, 0, -1), receiver), Error);
  }
}

TEST_CASE("waypoint follower moves at constant speed") {
  WaypointFollower f(Vec3::Zero(), {Vec3(1, 0, 0), Vec3(1, 1, 0)}, 0.5);
  double travelled = 0.0;
  Vec3 prev = Vec3::Zero();
  int ticks = 0;
  while (!f.finished()) {
    const Vec3 p = f.advance(0.01);
    travelled += (p - prev).norm();
    prev = p;
    ++ticks;
  }
  CHECK(travelled == doctest::Approx(2.0));
  CHECK(ticks == 400);
  CHECK(same(f.setpoint(), Vec3(1, 1, 0)));
  CHECK_THROWS_AS(WaypointFollower(Vec3::Zero(), {}, 0.0), Error);
}

TEST_CASE("displacement metric") {
  const Vec3 ref(1, 1, 5);
  CHECK(displacement_metric({ref, ref, ref}, ref) == 0.0);
  CHECK(displacement_metric({ref, ref + Vec3(0.3, 0, 0), ref}, ref) == doctest::Approx(0.3));
  CHECK(displacement_metric({ref + Vec3(0, 0, 2)}, ref) == 0.0);
  CHECK_THROWS_AS(displacement_metric({}, ref), Error);
}

TEST_CASE("vehicle params validity") {
  VehicleParams p;
  CHECK(p.is_valid());
  p.mass = 5.0;  // above the 4.8 kg lift ceiling
  CHECK_FALSE(p.is_valid());
}
