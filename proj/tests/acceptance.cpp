// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "aerobridge/aero.hpp"
#include "aerobridge/config.hpp"
#include "aerobridge/error.hpp"
#include "aerobridge/experiments.hpp"
#include "aerobridge/perception.hpp"
#include "aerobridge/report.hpp"
#include "aerobridge/scenario.hpp"
#include "aerobridge/transfer.hpp"

using namespace aerobridge;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict downwash_anchors() {
  const DownwashTable t;
  const DownwashSample full = downwash_lookup(t, 0.15, 100.0);
  const DownwashSample half = downwash_lookup(t, 0.15, 50.0);
  const DownwashSample zero = downwash_lookup(t, 0.15, 0.0);
  const DownwashSample far = downwash_lookup(t, 0.60, 50.0);
  const bool ok = full.airflow_pos_a == 14.0 && full.airflow_pos_b == 5.6 &&
                  half.delta_thrust == 200.0 && zero.airflow_pos_a == 9.6 &&
                  zero.airflow_pos_b == 9.6 && t.propeller().nominal_thrust == 1200.0 &&
                  far.delta_thrust <= 25.0;
  return {ok, fmt("A/B %.1f/%.1f m/s, 50%% dT %.0f gF, 0%% %.1f m/s and %.0f gF, far dT %.1f gF",
                  full.airflow_pos_a, full.airflow_pos_b, half.delta_thrust, zero.airflow_pos_a,
                  t.propeller().nominal_thrust, far.delta_thrust)};
}

Verdict pose_recovery() {
  const CmpLayout layout;
  const CameraIntrinsics camera;
  const CameraMount mount;
  std::mt19937_64 rng(20240601);
  std::mt19937_64 unused(0);
  std::uniform_real_distribution<double> range(0.3, 2.8), view(deg2rad(31), deg2rad(54)),
      angle(-kPi, kPi), pos(-50, 50);
  double worst_t = 0.0, worst_r = 0.0;
  int poses = 0;
  while (poses < 1000) {
    const double rx = pos(rng), ry = pos(rng), rz = 5.0 + 0.1 * pos(rng);
    const double rec_yaw = angle(rng), r = range(rng), v = view(rng), az = angle(rng);
    const Pose rec{Vec3(rx, ry, rz), quaternion_from_yaw(rec_yaw)};
    const Vec3 dir(std::cos(az), std::sin(az), 0.0);
    const Pose ebs{rec.position - r * std::sin(v) * dir + Vec3(0, 0, r * std::cos(v)),
                   quaternion_from_yaw(az)};
    const auto obs = observe_markers(ebs, mount, rec, layout, camera, 0.0, unused);
    if (!obs[0].detected) continue;
    const FrameTransform est = estimate_pose_from_marker(obs[0], camera, layout.center_side);
    const FrameTransform truth = (FrameTransform::from_pose(ebs) * mount.camera_in_body()).inverse() *
                                 FrameTransform::from_pose(rec);
    worst_t = std::max(worst_t, (est.translation - truth.translation).norm());
    worst_r = std::max(worst_r, rotation_angle(est.rotation.transpose() * truth.rotation));
    ++poses;
  }
  return {worst_t < 1e-6 && worst_r < 1e-6,
          fmt("%d poses, max position error %.2e m, max rotation error %.2e rad", poses, worst_t,
              worst_r)};
}

Verdict cmp_accuracy() {
  ScenarioConfig c;
  const CmpExperiment x = experiment_cmp_accuracy(c, 20);
  bool ok = true;
  std::string detail;
  for (const CmpRow& row : x.rows) {
    if (row.noise_sigma != c.camera_noise_sigma) continue;
    const bool row_ok = row.locked == row.iterations && row.mean_e_cm >= 0.3 &&
                        row.mean_e_cm <= 3.0 && row.mean_alpha_deg < 3.0;
    ok = ok && row_ok;
    detail += std::string(detail.empty() ? "" : ", ") + to_string(row.association) +
              fmt(" e %.3f cm a %.3f deg", row.mean_e_cm, row.mean_alpha_deg);
  }
  return {ok, detail};
}

Verdict noiseless_lock() {
  ScenarioConfig c;
  c.camera_noise_sigma = 0.0;
  c.experiment_indoor_gust_sigma = 0.0;
  const CmpExperiment x = experiment_cmp_accuracy(c, 5);
  bool ok = true;
  std::string detail;
  for (const CmpRow& row : x.rows) {
    if (row.noise_sigma != 0.0) continue;
    const bool row_ok =
        row.locked == row.iterations && row.mean_steady_e_cm <= 0.1 && row.mean_steady_alpha_deg < 1.0;
    ok = ok && row_ok;
    if (detail.find(to_string(row.association)) != std::string::npos) continue;
    detail += std::string(detail.empty() ? "" : ", ") + to_string(row.association) +
              fmt(" e %.4f cm a %.4f deg", row.mean_steady_e_cm, row.mean_steady_alpha_deg);
  }
  return {ok, detail};
}

Verdict trajectory_ordering() {
  const TrajectoryExperiment t = experiment_trajectories(ScenarioConfig{}, 50);
  const auto mm = [&](TrajectoryKind k) { return 1000.0 * t.row(k).mean; };
  return {t.ordering_holds(),
          fmt("mean V-H %.2f < H-H %.2f mm, V-V %.2f < H-V %.2f mm", mm(TrajectoryKind::kVH),
              mm(TrajectoryKind::kHH), mm(TrajectoryKind::kVV), mm(TrajectoryKind::kHV))};
}

Verdict end_to_end_timing() {
  const ScenarioConfig c;
  const RunReport r = run_scenario(c);
  const RunSummary& s = r.summary;
  const bool ok = s.success && s.transfer_duration && *s.transfer_duration <= 5.0 &&
                  c.wind_ambient.norm() == 4.0;
  return {ok, s.outcome + fmt(", transfer %.3f s, wind %.1f m/s, sim %.2f s",
                              s.transfer_duration.value_or(-1.0), c.wind_ambient.norm(),
                              s.sim_time)};
}

Verdict protocol_verification() {
  ScenarioConfig c;
  c.experiment_loss_budget = 2;
  c.protocol.retransmit = true;
  const ProtocolExperiment p = experiment_protocol_check(c);
  const CheckReport& n = p.nominal;
  const bool terminated = n.complete && n.terminal_states > 0;
  const bool ok = n.passed() && terminated && p.mutant.violations > 0 &&
                  !p.mutant.counterexamples.empty();
  return {ok, fmt("K=2: %zu states, %zu violations; mutant %zu violations", n.states,
                  n.violations, p.mutant.violations) +
                  (p.mutant.counterexamples.empty()
                       ? std::string()
                       : " (" + p.mutant.counterexamples.front().property + ")")};
}

Verdict kinematics_oracles() {
  // Attitude: quaternion integration against products of exact rotation matrices.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst_angle = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    UnitQuaternion q = UnitQuaternion::Identity();
    Mat3 r = Mat3::Identity();
    for (int i = 0; i < 1000; ++i) {
      const double t = i * 0.01;
      const Vec3 w = a * std::cos(t) + b * std::sin(0.5 * t);
      q = integrate_attitude(q, w, 0.01);
      const double th = w.norm() * 0.01;
      Mat3 k;
      k << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
      k /= w.norm();
      r = r * (Mat3::Identity() + std::sin(th) * k + (1 - std::cos(th)) * k * k);
    }
    worst_angle = std::max(worst_angle, rotation_angle(q.toRotationMatrix().transpose() * r));
  }

  // Slide: L = a T^2 / 2 with a = g (sin t - mu cos t).
  double worst_slide = 0.0;
  SlideGeometry g;
  BatterySpec b;
  for (double mu : {0.0, 0.1, 0.2, 0.5}) {
    for (double deg : {30.0, 45.0, 60.0}) {
      g.incline = deg2rad(deg);
      b.friction = mu;
      if (mu >= std::tan(g.incline)) continue;
      const double acc = kGravity * (std::sin(g.incline) - mu * std::cos(g.incline));
      worst_slide = std::max(worst_slide,
                             std::abs(slide_time(g, b) - std::sqrt(2.0 * 0.44 / acc)));
    }
  }

  // GPS: |ecef| = R + altitude.
  double worst_gps = 0.0;
  std::uniform_real_distribution<double> la(-kPi / 2, kPi / 2), lo(-kPi, kPi), alt(-100, 10000);
  for (int i = 0; i < 1000; ++i) {
    const GpsCoordinate p{la(rng), lo(rng), alt(rng)};
    const double radius = kEarthRadius + p.altitude;
    worst_gps = std::max(worst_gps, std::abs(gps_to_ecef(p).norm() - radius) / radius);
  }
  return {worst_angle < 1e-6 && worst_slide < 1e-9 && worst_gps < 1e-9,
          fmt("attitude %.2e rad, slide %.2e s, gps %.2e relative", worst_angle, worst_slide,
              worst_gps)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  ScenarioConfig c;
  c.seed = 2718;
  const fs::path root = fs::temp_directory_path() / "aerobridge_acceptance";
  fs::remove_all(root);
  write_run_report(run_scenario(c), (root / "a").string(), ReportFormat::kCsv);
  write_run_report(run_scenario(c), (root / "b").string(), ReportFormat::kCsv);
  bool ok = true;
  std::size_t bytes = 0;
  for (const char* f : {"trace.csv", "summary.json", "events.csv", "observations.csv", "nav_log.csv"}) {
    const std::string a = slurp(root / "a" / f);
    ok = ok && !a.empty() && a == slurp(root / "b" / f);
    bytes += a.size();
  }
  fs::remove_all(root);
  return {ok, fmt("seed 2718, %zu bytes compared across two runs", bytes)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const Criterion criteria[] = {
      {"downwash anchors", downwash_anchors},
      {"pose recovery exactness", pose_recovery},
      {"CMP accuracy band", cmp_accuracy},
      {"noiseless lock quality", noiseless_lock},
      {"trajectory ordering", trajectory_ordering},
      {"end-to-end timing", end_to_end_timing},
      {"protocol verification", protocol_verification},
      {"kinematics oracles", kinematics_oracles},
      {"determinism", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", index, c.name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
