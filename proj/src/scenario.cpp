#include "aerobridge/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "aerobridge/error.hpp"

namespace aerobridge {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined value.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GpsCoordinate local_to_gps(const Vec3& local, const ScenarioConfig& config) {
  const double lat0 = deg2rad(config.gps_origin_latitude_deg);
  const double lon0 = deg2rad(config.gps_origin_longitude_deg);
  GpsCoordinate g;
  g.latitude = lat0 + local.y() / kEarthRadius;
  g.longitude = lon0 + local.x() / (kEarthRadius * std::cos(lat0));
  g.altitude = local.z();
  return g;
}

Vec3 gps_to_local(const GpsCoordinate& gps, const ScenarioConfig& config) {
  const double lat0 = deg2rad(config.gps_origin_latitude_deg);
  const double lon0 = deg2rad(config.gps_origin_longitude_deg);
  return Vec3((gps.longitude - lon0) * kEarthRadius * std::cos(lat0),
              (gps.latitude - lat0) * kEarthRadius, gps.altitude);
}

DockingRig::DockingRig(const ScenarioConfig& config, std::uint64_t seed, const Pose& ebs_start,
                       const Pose& receiver_start)
    : config_(config),
      ebs_params_(ebs_params(config)),
      receiver_params_(receiver_params(config)),
      nav_params_(nav_params(config)),
      intrinsics_(intrinsics(config)),
      layout_(layout(config)),
      envelope_(envelope(config)),
      table_(downwash_table(config)),
      wind_(config.wind_ambient, config.wind_gust_sigma, config.wind_gust_tau,
            derive_seed(seed, 1), config.wind_gust_cap),
      camera_rng_(derive_seed(seed, 2)),
      dt_(1.0 / config.physics_rate),
      receiver_setpoint_(receiver_start.position),
      receiver_yaw_(receiver_start.yaw()),
      ebs_setpoint_(ebs_start.position),
      ebs_yaw_setpoint_(ebs_start.yaw()) {
  ebs_.pose = ebs_start;
  receiver_.pose = receiver_start;
  receiver_.battery_level = config.receiver_battery;
}

void DockingRig::hold_ebs(const Vec3& setpoint, double yaw) {
  if (mode_ == EbsMode::kNav) {
    ebs_pos_ctrl_.set_integral(ebs_vel_ctrl_.integral() * (ebs_params_.vel_i / ebs_params_.pos_i));
  }
  mode_ = EbsMode::kHold;
  ebs_setpoint_ = setpoint;
  ebs_yaw_setpoint_ = yaw;
  follower_.reset();
}

void DockingRig::follow(const std::vector<Vec3>& waypoints, double speed, double yaw) {
  if (mode_ == EbsMode::kNav) {
    ebs_pos_ctrl_.set_integral(ebs_vel_ctrl_.integral() * (ebs_params_.vel_i / ebs_params_.pos_i));
  }
  mode_ = EbsMode::kFollow;
  ebs_yaw_setpoint_ = yaw;
  follower_.emplace(ebs_.pose.position, waypoints, speed);
  ebs_setpoint_ = follower_->setpoint();
}

void DockingRig::start_nav(const Vec3& search_anchor, double search_heading) {
  if (mode_ != EbsMode::kNav) {
    ebs_vel_ctrl_.set_integral(ebs_pos_ctrl_.integral() * (ebs_params_.pos_i / ebs_params_.vel_i));
  }
  mode_ = EbsMode::kNav;
  follower_.reset();
  nav_ = NavState{};
  nav_.search_anchor = search_anchor;
  nav_.search_heading = search_heading;
  command_ = NavCommand{};
  pipeline_.clear();
  next_frame_ = static_cast<std::uint64_t>(std::ceil(now_ * config_.camera_fps - 1e-9));
}

FrameTransform DockingRig::misalignment() const {
  const FrameTransform rel =
      FrameTransform::from_pose(receiver_.pose).inverse() * FrameTransform::from_pose(ebs_.pose);
  return FrameTransform{rel.rotation, rel.translation - nav_params_.target_offset};
}

DockingRig::Tick DockingRig::tick() {
  Tick out;

  if (mode_ == EbsMode::kNav &&
      now_ + 1e-9 >= static_cast<double>(next_frame_) / config_.camera_fps) {
    ++next_frame_;
    pipeline_.emplace_back(now_, observe_markers(ebs_.pose, nav_params_.mount, receiver_.pose,
                                                 layout_, intrinsics_, config_.camera_noise_sigma,
                                                 camera_rng_, envelope_));
    if (pipeline_.size() > static_cast<std::size_t>(config_.camera_latency_frames)) {
      const auto [captured, observations] = pipeline_.front();
      pipeline_.pop_front();
      NavInput input;
      input.fused = perceive(observations, layout_, intrinsics_, config_.nav_association);
      input.ebs_pose = ebs_.pose;
      const NavPhase before = nav_.phase;
      const NavStep s = nav_step(nav_, input, nav_params_, 1.0 / config_.camera_fps);
      nav_ = s.state;
      command_ = s.command;
      last_detected_ = input.fused.has_value();
      last_observations_.clear();
      for (const MarkerObservation& o : observations) {
        ObservationRow row{captured, o};
        if (last_detected_) {
          row.has_estimate = true;
          row.est_position = nav_.relative_position;
          row.est_heading = nav_.relative_heading;
        }
        last_observations_.push_back(row);
      }
      out.frame_processed = true;
      if (nav_.phase != before) out.phase_before = before;
    }
  }

  VehicleCommand ebs_cmd;
  switch (mode_) {
    case EbsMode::kHold:
      ebs_cmd = ebs_pos_ctrl_.update(ebs_, ebs_setpoint_, ebs_yaw_setpoint_, ebs_params_, dt_);
      break;
    case EbsMode::kFollow:
      ebs_setpoint_ = follower_->advance(dt_);
      out.follow_finished = follower_->finished();
      ebs_cmd = ebs_pos_ctrl_.update(ebs_, ebs_setpoint_, ebs_yaw_setpoint_, ebs_params_, dt_);
      break;
    case EbsMode::kNav:
      ebs_cmd = ebs_vel_ctrl_.update(ebs_, command_.velocity, command_.yaw_rate, ebs_params_, dt_);
      break;
  }
  const VehicleCommand rec_cmd =
      receiver_ctrl_.update(receiver_, receiver_setpoint_, receiver_yaw_, receiver_params_, dt_);

  const Vec3 wind = wind_.sample(dt_);
  // Without rotor overlap there is no downwash, however close the altitudes.
  const Vec3 gap = ebs_.pose.position - receiver_.pose.position;
  const Disturbance downwash = overlap_from_xd(std::hypot(gap.x(), gap.y())) > 0.0
                                   ? disturbance_on_receiver(ebs_.pose, receiver_.pose, table_)
                                   : Disturbance{};
  ebs_ = step(ebs_, ebs_cmd, Disturbance{}, wind, ebs_params_, dt_);
  receiver_ = step(receiver_, rec_cmd, downwash, wind, receiver_params_, dt_);

  ++ticks_;
  now_ = static_cast<double>(ticks_) * dt_;
  return out;
}

namespace {

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

class HandoffRun {
 public:
  explicit HandoffRun(const ScenarioConfig& config)
      : c_(config),
        rig_(config, config.seed,
             Pose{config.ebs_start, quaternion_from_yaw(deg2rad(config.ebs_start_yaw_deg))},
             Pose{config.receiver_position, quaternion_from_yaw(deg2rad(config.receiver_yaw_deg))}),
        link_(link_model(config), derive_seed(config.seed, 3)),
        gps_rng_(derive_seed(config.seed, 4)),
        transfer_(slide_geometry(config), battery_spec(config), config.servo_delay,
                  latch_tolerance(config)) {}

  RunReport run();

 private:
  double now() const { return rig_.now(); }
  void log(const char* source, const std::string& event, const std::string& detail = {}) {
    report_.events.push_back({now(), source, event, detail});
  }
  void send(const ProtocolMessage& msg);
  void ebs_event(const ProtocolEvent& ev);
  void receiver_event(const ProtocolEvent& ev);
  void ebs_action(Action a);
  void fire_timers();
  void on_nav_change(NavPhase before, NavPhase after);
  void on_transfer(const TimelineEntry& e);
  void record_tick(const DockingRig::Tick& tick);

  ScenarioConfig c_;
  DockingRig rig_;
  Link link_;
  std::mt19937_64 gps_rng_;
  TransferProcess transfer_;
  BatteryCase battery_case_;
  EbsFsm ebs_;
  ReceiverFsm receiver_;
  bool request_raised_ = false;
  std::optional<double> lock_since_;
  Vec3 approach_end_ = Vec3::Zero();
  std::string abort_reason_;
  double lock_e_sum_ = 0.0;
  double lock_alpha_sum_ = 0.0;
  long lock_samples_ = 0;
  RunReport report_;
};

void HandoffRun::send(const ProtocolMessage& msg) {
  if (msg.kind == MessageKind::kAbort && abort_reason_.empty()) abort_reason_ = msg.reason;
  const std::string detail = std::string(to_string(msg.kind)) + " seq=" + std::to_string(msg.seq);
  if (link_.transmit(msg, now())) {
    log(to_string(msg.sender), "send", detail);
  } else {
    log(to_string(msg.sender), "drop", detail);
  }
}

void HandoffRun::ebs_event(const ProtocolEvent& ev) {
  const EbsState before = ebs_.state;
  const EbsStep s = ebs_fsm_step(ebs_, ev, now(), c_.protocol);
  ebs_ = s.fsm;
  if (ebs_.state != before) {
    log("ebs", "state", std::string(to_string(before)) + "->" + to_string(ebs_.state));
  }
  for (const ProtocolMessage& m : s.outgoing) send(m);
  for (Action a : s.actions) ebs_action(a);
}

void HandoffRun::receiver_event(const ProtocolEvent& ev) {
  const ReceiverState before = receiver_.state;
  const ReceiverStep s = receiver_fsm_step(receiver_, ev, now(), c_.protocol);
  receiver_ = s.fsm;
  if (receiver_.state != before) {
    log("receiver", "state", std::string(to_string(before)) + "->" + to_string(receiver_.state));
  }
  for (const ProtocolMessage& m : s.outgoing) send(m);
  for (Action a : s.actions) log("receiver", "action", to_string(a));
}

void HandoffRun::ebs_action(Action a) {
  log("ebs", "action", to_string(a));
  const Pose& pose = rig_.ebs().pose;
  switch (a) {
    case Action::kStartEnroute: {
      GpsCoordinate fix = ebs_.receiver_gps;
      fix.altitude = ebs_.receiver_altitude;
      const Vec3 reported = gps_to_local(fix, c_);
      const double heading = ebs_.receiver_heading;
      const Vec3 dock_direction = rotation_z(heading) * Vec3(-1.0, 0.0, 0.0);
      // GPS error is too large to fly to the docking point itself. The approach
      // ends further out on the camera's 45 degree line of sight, where the
      // receiver sits mid-frame and the detection footprint is widest.
      const double h = c_.nav_search_height;
      const Vec3 search_point = reported + h * dock_direction + Vec3(0.0, 0.0, h);
      const std::vector<Vec3> waypoints = plan_trajectory(
          c_.trajectory_kind, pose.position, search_point, standoff(c_), dock_direction);
      approach_end_ = waypoints.back();
      char buf[160];
      std::snprintf(buf, sizeof buf, "reported=(%.3f, %.3f, %.3f) heading=%.2f", reported.x(),
                    reported.y(), reported.z(), rad2deg(heading));
      log("ebs", "approach", buf);
      rig_.follow(waypoints, c_.trajectory_speed, heading);
      break;
    }
    case Action::kStartSearch:
      rig_.start_nav(approach_end_, ebs_.receiver_heading);
      break;
    case Action::kOpenSlides:
      transfer_.open(now());
      break;
    case Action::kRelease:
      transfer_.request_release(now());
      break;
    case Action::kCloseSlides:
      transfer_.close(now());
      break;
    case Action::kReturnHome:
    case Action::kAbortHandoff:
      rig_.hold_ebs(pose.position, pose.yaw());
      break;
    case Action::kEngagePositionHold:
    case Action::kResumeMission:
      break;
  }
}

void HandoffRun::fire_timers() {
  const double t = now();
  if (ebs_.retransmit_at && t >= *ebs_.retransmit_at) {
    ebs_event(ProtocolEvent::of(EventKind::kRetransmitTimer));
    if (ebs_.retransmit_at && t >= *ebs_.retransmit_at) ebs_.retransmit_at.reset();
  }
  if (ebs_.timeout_at && t >= *ebs_.timeout_at) {
    ebs_event(ProtocolEvent::of(EventKind::kTimeout));
    if (ebs_.timeout_at && t >= *ebs_.timeout_at) ebs_.timeout_at.reset();
  }
  if (receiver_.retransmit_at && t >= *receiver_.retransmit_at) {
    receiver_event(ProtocolEvent::of(EventKind::kRetransmitTimer));
    if (receiver_.retransmit_at && t >= *receiver_.retransmit_at) receiver_.retransmit_at.reset();
  }
  if (receiver_.timeout_at && t >= *receiver_.timeout_at) {
    receiver_event(ProtocolEvent::of(EventKind::kTimeout));
    if (receiver_.timeout_at && t >= *receiver_.timeout_at) receiver_.timeout_at.reset();
  }
}

void HandoffRun::on_nav_change(NavPhase before, NavPhase after) {
  log("nav", "phase", std::string(to_string(before)) + "->" + to_string(after));
  switch (after) {
    case NavPhase::kAlign:
      ebs_event(ProtocolEvent::of(before == NavPhase::kLock ? EventKind::kNavUnlocked
                                                             : EventKind::kNavDetected));
      break;
    case NavPhase::kLock:
      if (!report_.summary.lock_time) report_.summary.lock_time = now();
      ebs_event(ProtocolEvent::of(EventKind::kNavLocked));
      break;
    case NavPhase::kLost:
      ebs_event(ProtocolEvent::of(EventKind::kNavLost));
      break;
    case NavPhase::kSearch:
      break;
  }
}

void HandoffRun::on_transfer(const TimelineEntry& e) {
  log("transfer", to_string(e.event), fmt("%.4f", e.t));
  switch (e.event) {
    case TransferEvent::kRelease:
      try {
        battery_case_ = dispenser_step(battery_case_, DispenserCommand::kDispense).battery_case;
        ebs_event(ProtocolEvent::of(EventKind::kReleaseDone));
      } catch (const Error& err) {
        if (err.code() != ErrorCode::kNoFullSlot) throw;
        log("ebs", "dispenser", err.what());
        ebs_event(ProtocolEvent::of(EventKind::kNoBattery));
      }
      break;
    case TransferEvent::kIrArrival:
      receiver_event(ProtocolEvent::of(EventKind::kIrArrival));
      break;
    case TransferEvent::kSlidesClosed:
      ebs_event(ProtocolEvent::of(EventKind::kSlidesClosed));
      break;
    default:
      break;
  }
}

void HandoffRun::record_tick(const DockingRig::Tick& tick) {
  const NavState& nav = rig_.nav();
  const bool nav_active = rig_.mode() == DockingRig::EbsMode::kNav;

  TraceRow row;
  row.t = now();
  row.ebs_position = rig_.ebs().pose.position;
  row.receiver_position = rig_.receiver().pose.position;
  row.nav_active = nav_active;
  row.phase = nav.phase;
  row.has_errors = nav_active && nav.has_estimate;
  if (row.has_errors) {
    row.e_cm = nav.last_errors.e * 100.0;
    row.alpha_deg = nav.last_errors.alpha;
  }
  row.ebs_state = ebs_.state;
  row.receiver_state = receiver_.state;
  report_.trace.push_back(row);

  const Vec3 d = rig_.receiver().pose.position - rig_.receiver_setpoint();
  report_.summary.max_displacement =
      std::max(report_.summary.max_displacement, std::hypot(d.x(), d.y()));

  if (!tick.frame_processed) return;
  for (const ObservationRow& o : rig_.last_observations()) report_.observations.push_back(o);
  NavLogRow nl;
  nl.t = now();
  nl.phase = nav.phase;
  nl.e_cm = nav.last_errors.e * 100.0;
  nl.alpha_deg = nav.last_errors.alpha;
  nl.command = rig_.nav_command();
  nl.detected = rig_.last_frame_detected();
  report_.nav_log.push_back(nl);

  if (nav.phase == NavPhase::kLock) {
    const FrameTransform m = rig_.misalignment();
    lock_e_sum_ += m.translation.norm() * 100.0;
    lock_alpha_sum_ += rad2deg(rotation_angle(m.rotation));
    ++lock_samples_;
  }
}

RunReport HandoffRun::run() {
  RunSummary& summary = report_.summary;
  summary.seed = c_.seed;
  rig_.hold_ebs(c_.ebs_start, deg2rad(c_.ebs_start_yaw_deg));
  std::normal_distribution<double> unit(0.0, 1.0);

  while (now() < c_.duration - 1e-9) {
    if (!request_raised_ && now() + 1e-9 >= c_.receiver_request_time &&
        c_.receiver_battery <= c_.protocol.low_battery_threshold) {
      request_raised_ = true;
      const Vec3 truth = rig_.receiver().pose.position;
      const double ex = c_.gps_sigma_horizontal * unit(gps_rng_);
      const double ey = c_.gps_sigma_horizontal * unit(gps_rng_);
      const double ez = c_.gps_sigma_vertical * unit(gps_rng_);
      const Vec3 noisy = truth + Vec3(ex, ey, ez);
      receiver_.gps = local_to_gps(noisy, c_);
      receiver_.altitude = noisy.z();
      receiver_.heading = rig_.receiver().pose.yaw();
      log("receiver", "battery-low", fmt("%.1f", c_.receiver_battery));
      receiver_event(ProtocolEvent::of(EventKind::kBatteryLow));
    }

    for (const ProtocolMessage& m : link_.poll(now())) {
      log(m.sender == Party::kEbs ? "receiver" : "ebs", "deliver",
          std::string(to_string(m.kind)) + " seq=" + std::to_string(m.seq));
      if (m.sender == Party::kEbs) {
        receiver_event(ProtocolEvent::of(m));
      } else {
        ebs_event(ProtocolEvent::of(m));
      }
    }
    fire_timers();

    const DockingRig::Tick tick = rig_.tick();
    if (tick.follow_finished && ebs_.state == EbsState::kEnroute) {
      ebs_event(ProtocolEvent::of(EventKind::kNavArrived));
    }
    if (tick.phase_before) on_nav_change(*tick.phase_before, rig_.nav().phase);

    if (rig_.nav().phase == NavPhase::kLock && ebs_.state == EbsState::kLocked) {
      if (!lock_since_) lock_since_ = now();
      if (now() - *lock_since_ + 1e-9 >= c_.nav_settle_time) {
        ebs_event(ProtocolEvent::of(EventKind::kInternalGo));
      }
    } else {
      lock_since_.reset();
    }

    for (const TimelineEntry& e : transfer_.advance(now(), rig_.misalignment())) on_transfer(e);

    record_tick(tick);

    if (is_terminal(ebs_.state) || receiver_.state == ReceiverState::kAborted) break;
  }

  summary.sim_time = now();
  summary.messages_sent = link_.sent();
  summary.messages_dropped = link_.dropped();
  int left = 0;
  for (SlotState s : battery_case_.slots) left += s == SlotState::kFull ? 1 : 0;
  summary.batteries_left = left;
  if (!transfer_.timeline().events.empty()) summary.timeline = transfer_.timeline();
  if (transfer_.timeline().completed) summary.transfer_duration = transfer_.timeline().duration();
  if (lock_samples_ > 0) {
    summary.lock_mean_e_cm = lock_e_sum_ / static_cast<double>(lock_samples_);
    summary.lock_mean_alpha_deg = lock_alpha_sum_ / static_cast<double>(lock_samples_);
  }
  if (ebs_.state == EbsState::kReturningHome && receiver_.state == ReceiverState::kReceived) {
    summary.success = true;
    summary.outcome = "TransferDone";
  } else if (ebs_.state == EbsState::kAborted || receiver_.state == ReceiverState::kAborted) {
    summary.outcome = "Aborted";
    summary.reason = abort_reason_;
  } else {
    summary.outcome = "Timeout";
    summary.reason = std::string("ebs=") + to_string(ebs_.state) +
                     " receiver=" + to_string(receiver_.state);
  }
  log("sim", "end", summary.outcome);
  return std::move(report_);
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config) {
  try {
    validate_config(config);
    HandoffRun run(config);
    return run.run();
  } catch (const Error& e) {
    RunReport report;
    report.summary.seed = config.seed;
    report.summary.outcome = "Error";
    report.summary.reason = std::string(to_string(e.code())) + ": " + e.what();
    return report;
  }
}

}  // namespace aerobridge
