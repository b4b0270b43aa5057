#include "aerobridge/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

#include "aerobridge/error.hpp"

namespace aerobridge {
namespace {

using FieldRef = std::variant<double*, int*, bool*, std::uint64_t*, Vec3*, TrajectoryKind*,
                              Association*>;

struct Field {
  const char* key;
  FieldRef ref;
};

std::vector<Field> fields(ScenarioConfig& c) {
  ProtocolTimings& p = c.protocol;
  return {
      {"seed", &c.seed},
      {"duration", &c.duration},
      {"physics_rate", &c.physics_rate},
      {"wind.ambient", &c.wind_ambient},
      {"wind.gust_sigma", &c.wind_gust_sigma},
      {"wind.gust_tau", &c.wind_gust_tau},
      {"wind.gust_cap", &c.wind_gust_cap},
      {"ebs.mass", &c.ebs_mass},
      {"ebs.start", &c.ebs_start},
      {"ebs.start_yaw_deg", &c.ebs_start_yaw_deg},
      {"receiver.mass", &c.receiver_mass},
      {"receiver.position", &c.receiver_position},
      {"receiver.yaw_deg", &c.receiver_yaw_deg},
      {"receiver.battery", &c.receiver_battery},
      {"receiver.request_time", &c.receiver_request_time},
      {"vehicle.max_lift", &c.max_lift},
      {"vehicle.frame_size", &c.frame_size},
      {"vehicle.pos_p", &c.pos_p},
      {"vehicle.pos_d", &c.pos_d},
      {"vehicle.pos_i", &c.pos_i},
      {"vehicle.vel_p", &c.vel_p},
      {"vehicle.vel_i", &c.vel_i},
      {"vehicle.yaw_p", &c.yaw_p},
      {"vehicle.drag", &c.drag},
      {"trajectory.kind", &c.trajectory_kind},
      {"trajectory.speed", &c.trajectory_speed},
      {"trajectory.standoff_horizontal", &c.standoff_horizontal},
      {"trajectory.standoff_vertical", &c.standoff_vertical},
      {"gps.sigma_horizontal", &c.gps_sigma_horizontal},
      {"gps.sigma_vertical", &c.gps_sigma_vertical},
      {"gps.origin_latitude_deg", &c.gps_origin_latitude_deg},
      {"gps.origin_longitude_deg", &c.gps_origin_longitude_deg},
      {"camera.fx", &c.camera_fx},
      {"camera.fy", &c.camera_fy},
      {"camera.skew", &c.camera_skew},
      {"camera.cx", &c.camera_cx},
      {"camera.cy", &c.camera_cy},
      {"camera.width", &c.camera_width},
      {"camera.height", &c.camera_height},
      {"camera.fps", &c.camera_fps},
      {"camera.tilt_deg", &c.camera_tilt_deg},
      {"camera.noise_sigma", &c.camera_noise_sigma},
      {"camera.latency_frames", &c.camera_latency_frames},
      {"layout.center_side", &c.layout_center_side},
      {"layout.satellite_side", &c.layout_satellite_side},
      {"layout.satellite_offset", &c.layout_satellite_offset},
      {"envelope.min_angle_deg", &c.envelope_min_angle_deg},
      {"envelope.max_angle_deg", &c.envelope_max_angle_deg},
      {"envelope.reference_range", &c.envelope_reference_range},
      {"nav.max_position_error", &c.nav_max_position_error},
      {"nav.max_heading_error_deg", &c.nav_max_heading_error_deg},
      {"nav.lock_frames", &c.nav_lock_frames},
      {"nav.lost_timeout", &c.nav_lost_timeout},
      {"nav.align_gain", &c.nav_align_gain},
      {"nav.yaw_gain", &c.nav_yaw_gain},
      {"nav.max_speed", &c.nav_max_speed},
      {"nav.max_yaw_rate", &c.nav_max_yaw_rate},
      {"nav.vertical_first_gate", &c.nav_vertical_first_gate},
      {"nav.search_speed", &c.nav_search_speed},
      {"nav.search_leg_growth", &c.nav_search_leg_growth},
      {"nav.association", &c.nav_association},
      {"nav.settle_time", &c.nav_settle_time},
      {"nav.search_height", &c.nav_search_height},
      {"nav.reacquire_height", &c.nav_reacquire_height},
      {"link.loss", &c.link_loss},
      {"link.latency", &c.link_latency},
      {"link.jitter", &c.link_jitter},
      {"protocol.retransmit_interval", &p.retransmit_interval},
      {"protocol.max_attempts", &p.max_attempts},
      {"protocol.retransmit", &p.retransmit},
      {"protocol.verification_timeout", &p.verification_timeout},
      {"protocol.lock_timeout", &p.lock_timeout},
      {"protocol.slide_ack_timeout", &p.slide_ack_timeout},
      {"protocol.release_window", &p.release_window},
      {"protocol.transfer_timeout", &p.transfer_timeout},
      {"protocol.hold_timeout", &p.hold_timeout},
      {"protocol.receive_timeout", &p.receive_timeout},
      {"protocol.low_battery_threshold", &p.low_battery_threshold},
      {"transfer.ebs_slide_length", &c.slide_ebs_length},
      {"transfer.receiver_slide_length", &c.slide_receiver_length},
      {"transfer.incline_deg", &c.slide_incline_deg},
      {"transfer.open_time", &c.slide_open_time},
      {"transfer.close_time", &c.slide_close_time},
      {"transfer.servo_delay", &c.servo_delay},
      {"transfer.battery_mass", &c.battery_mass},
      {"transfer.friction", &c.battery_friction},
      {"transfer.latch_translation", &c.latch_translation},
      {"transfer.latch_rotation_deg", &c.latch_rotation_deg},
      {"aero.push_coefficient", &c.aero_push_coefficient},
      {"experiment.trajectory_iterations", &c.experiment_trajectory_iterations},
      {"experiment.separation", &c.experiment_separation},
      {"experiment.trajectory_window", &c.experiment_trajectory_window},
      {"experiment.trajectory_speed", &c.experiment_trajectory_speed},
      {"experiment.indoor_wind", &c.experiment_indoor_wind},
      {"experiment.indoor_gust_sigma", &c.experiment_indoor_gust_sigma},
      {"experiment.cmp_iterations", &c.experiment_cmp_iterations},
      {"experiment.cmp_window", &c.experiment_cmp_window},
      {"experiment.cmp_steady", &c.experiment_cmp_steady},
      {"experiment.cmp_settle", &c.experiment_cmp_settle},
      {"experiment.loss_budget", &c.experiment_loss_budget},
      {"experiment.max_depth", &c.experiment_max_depth},
      {"experiment.frontier_cap", &c.experiment_frontier_cap},
  };
}

const std::regex& aero_key_pattern() {
  static const std::regex re(
      R"(aero\.cell\[(0\.15|0\.30|0\.45|0\.60),(0|50|100)\]\.(delta_thrust|airflow_pos_a|airflow_pos_b))");
  return re;
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::kConfigError, msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

std::string format_double(double v) {
  // Shortest text that reads back to the same value.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Association association_from_string(const std::string& s) {
  for (Association a : {Association::kAuto, Association::kFrontBack, Association::kLeftBack,
                        Association::kRightBack}) {
    if (s == to_string(a)) return a;
  }
  throw Error(ErrorCode::kInvalidArgument, "expected auto, Front-Back, Left-Back or Right-Back");
}

struct Assign {
  const std::string& text;

  bool operator()(double* v) const { return parse_double(text, *v); }
  bool operator()(int* v) const {
    char* end = nullptr;
    errno = 0;
    const long x = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || errno != 0 || end != text.c_str() + text.size() || x < INT32_MIN ||
        x > INT32_MAX) {
      return false;
    }
    *v = static_cast<int>(x);
    return true;
  }
  bool operator()(bool* v) const {
    if (text == "true") *v = true;
    else if (text == "false") *v = false;
    else return false;
    return true;
  }
  bool operator()(std::uint64_t* v) const {
    if (text.empty() || text[0] == '-') return false;
    char* end = nullptr;
    errno = 0;
    const unsigned long long x = std::strtoull(text.c_str(), &end, 10);
    if (errno != 0 || end != text.c_str() + text.size()) return false;
    *v = x;
    return true;
  }
  bool operator()(Vec3* v) const {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    if (parts.size() != 3) return false;
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!parse_double(parts[i], out[i])) return false;
    }
    *v = out;
    return true;
  }
  bool operator()(TrajectoryKind* v) const {
    try {
      *v = trajectory_kind_from_string(text);
      return true;
    } catch (const Error&) {
      return false;
    }
  }
  bool operator()(Association* v) const {
    try {
      *v = association_from_string(text);
      return true;
    } catch (const Error&) {
      return false;
    }
  }
};

struct Format {
  std::string operator()(double* v) const { return format_double(*v); }
  std::string operator()(int* v) const { return std::to_string(*v); }
  std::string operator()(bool* v) const { return *v ? "true" : "false"; }
  std::string operator()(std::uint64_t* v) const { return std::to_string(*v); }
  std::string operator()(Vec3* v) const {
    return format_double(v->x()) + ", " + format_double(v->y()) + ", " + format_double(v->z());
  }
  std::string operator()(TrajectoryKind* v) const { return to_string(*v); }
  std::string operator()(Association* v) const { return to_string(*v); }
};

void require(bool ok, const char* key, const char* what) {
  if (!ok) config_error(std::string(key) + ": " + what);
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  const std::vector<Field> registry = fields(cfg);
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  for (int line_no = 1; std::getline(in, raw); ++line_no) {
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string::npos) config_error(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) config_error(where + ": duplicate key '" + key + "'");

    if (std::regex_match(key, aero_key_pattern())) {
      double v = 0.0;
      if (!parse_double(value, v)) config_error(where + ": " + key + ": expected a number");
      cfg.aero_overrides[key] = v;
      continue;
    }
    const Field* field = nullptr;
    for (const Field& f : registry) {
      if (key == f.key) field = &f;
    }
    if (field == nullptr) config_error(where + ": unknown key '" + key + "'");
    if (!std::visit(Assign{value}, field->ref)) {
      config_error(where + ": " + key + ": cannot parse '" + value + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) config_error("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& config) {
  ScenarioConfig copy = config;
  std::string out;
  for (const Field& f : fields(copy)) {
    out += f.key;
    out += " = ";
    out += std::visit(Format{}, f.ref);
    out += '\n';
  }
  for (const auto& [key, value] : copy.aero_overrides) {
    out += key + " = " + format_double(value) + '\n';
  }
  return out;
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

void validate_config(const ScenarioConfig& c) {
  require(c.duration > 0.0, "duration", "must be positive");
  require(c.physics_rate >= 50.0, "physics_rate", "must be at least 50 Hz");
  require(c.wind_gust_sigma >= 0.0, "wind.gust_sigma", "must be >= 0");
  require(c.wind_gust_tau > 0.0, "wind.gust_tau", "must be positive");
  require(c.wind_gust_cap >= 0.0, "wind.gust_cap", "must be >= 0");
  require(ebs_params(c).is_valid(), "ebs.mass", "vehicle parameters out of range (mass < max_lift)");
  require(receiver_params(c).is_valid(), "receiver.mass",
          "vehicle parameters out of range (mass < max_lift)");
  require(c.ebs_start.z() >= 0.0, "ebs.start", "must be above ground");
  require(c.receiver_position.z() >= 0.0, "receiver.position", "must be above ground");
  require(c.receiver_battery >= 0.0 && c.receiver_battery <= 100.0, "receiver.battery",
          "must be in [0, 100]");
  require(c.receiver_request_time >= 0.0, "receiver.request_time", "must be >= 0");
  require(c.trajectory_speed > 0.0, "trajectory.speed", "must be positive");
  require(c.standoff_horizontal >= 0.0, "trajectory.standoff_horizontal", "must be >= 0");
  require(c.standoff_vertical >= 0.0, "trajectory.standoff_vertical", "must be >= 0");
  require(c.gps_sigma_horizontal >= 0.0, "gps.sigma_horizontal", "must be >= 0");
  require(c.gps_sigma_vertical >= 0.0, "gps.sigma_vertical", "must be >= 0");
  require(std::abs(c.gps_origin_latitude_deg) <= 90.0, "gps.origin_latitude_deg",
          "must be in [-90, 90]");
  require(std::abs(c.gps_origin_longitude_deg) <= 180.0, "gps.origin_longitude_deg",
          "must be in [-180, 180]");
  require(intrinsics(c).is_valid(), "camera", "intrinsics out of range");
  require(c.camera_tilt_deg >= 0.0 && c.camera_tilt_deg <= 90.0, "camera.tilt_deg",
          "must be in [0, 90]");
  require(c.camera_noise_sigma >= 0.0, "camera.noise_sigma", "must be >= 0");
  require(c.camera_latency_frames >= 0, "camera.latency_frames", "must be >= 0");
  require(c.camera_fps <= c.physics_rate, "camera.fps", "must not exceed physics_rate");
  require(layout(c).is_valid(), "layout", "markers overlap or have non-positive size");
  require(c.envelope_min_angle_deg >= 0.0 && c.envelope_min_angle_deg < c.envelope_max_angle_deg &&
              c.envelope_max_angle_deg <= 90.0,
          "envelope", "need 0 <= min_angle_deg < max_angle_deg <= 90");
  require(c.envelope_reference_range > 0.0, "envelope.reference_range", "must be positive");
  require(c.nav_max_position_error > 0.0, "nav.max_position_error", "must be positive");
  require(c.nav_max_heading_error_deg > 0.0, "nav.max_heading_error_deg", "must be positive");
  require(c.nav_lock_frames >= 1, "nav.lock_frames", "must be >= 1");
  require(c.nav_lost_timeout > 0.0, "nav.lost_timeout", "must be positive");
  require(c.nav_align_gain > 0.0, "nav.align_gain", "must be positive");
  require(c.nav_yaw_gain > 0.0, "nav.yaw_gain", "must be positive");
  require(c.nav_max_speed > 0.0, "nav.max_speed", "must be positive");
  require(c.nav_max_yaw_rate > 0.0, "nav.max_yaw_rate", "must be positive");
  require(c.nav_vertical_first_gate >= 0.0, "nav.vertical_first_gate", "must be >= 0");
  require(c.nav_search_speed > 0.0, "nav.search_speed", "must be positive");
  require(c.nav_search_leg_growth > 0.0, "nav.search_leg_growth", "must be positive");
  require(c.nav_settle_time >= 0.0, "nav.settle_time", "must be >= 0");
  require(c.nav_search_height >= 0.0, "nav.search_height", "must be >= 0");
  require(c.nav_reacquire_height >= 0.0, "nav.reacquire_height", "must be >= 0");
  require(link_model(c).is_valid(), "link", "need 0 <= loss < 1 and 0 <= jitter <= latency");
  require(c.protocol.is_valid(), "protocol", "timings must be positive");
  require(slide_geometry(c).is_valid(), "transfer", "slide geometry out of range");
  require(battery_spec(c).is_valid(), "transfer", "battery mass must be positive, friction >= 0");
  require(c.servo_delay >= 0.0, "transfer.servo_delay", "must be >= 0");
  require(c.latch_translation > 0.0, "transfer.latch_translation", "must be positive");
  require(c.latch_rotation_deg > 0.0, "transfer.latch_rotation_deg", "must be positive");
  require(c.aero_push_coefficient >= 0.0, "aero.push_coefficient", "must be >= 0");
  for (const auto& [key, value] : c.aero_overrides) {
    require(std::regex_match(key, aero_key_pattern()), key.c_str(), "unknown aero cell key");
    require(value >= 0.0, key.c_str(), "must be >= 0");
  }
  try {
    downwash_table(c).validate();
  } catch (const Error& e) {
    config_error(std::string("aero: ") + e.what());
  }
  require(c.experiment_trajectory_iterations >= 2, "experiment.trajectory_iterations",
          "must be >= 2");
  require(c.experiment_separation > 0.0, "experiment.separation", "must be positive");
  require(c.experiment_trajectory_window > 0.0, "experiment.trajectory_window",
          "must be positive");
  require(c.experiment_trajectory_speed > 0.0, "experiment.trajectory_speed", "must be positive");
  require(c.experiment_indoor_gust_sigma >= 0.0, "experiment.indoor_gust_sigma", "must be >= 0");
  require(c.experiment_cmp_iterations >= 2, "experiment.cmp_iterations", "must be >= 2");
  require(c.experiment_cmp_window > 0.0, "experiment.cmp_window", "must be positive");
  require(c.experiment_cmp_settle > 0.0, "experiment.cmp_settle", "must be positive");
  require(c.experiment_cmp_steady > 0.0 && c.experiment_cmp_steady <= c.experiment_cmp_window,
          "experiment.cmp_steady", "must be in (0, cmp_window]");
  require(c.experiment_loss_budget >= 0 && c.experiment_loss_budget <= 3,
          "experiment.loss_budget", "must be in [0, 3]");
  require(c.experiment_max_depth > 0, "experiment.max_depth", "must be positive");
  require(c.experiment_frontier_cap > 0, "experiment.frontier_cap", "must be positive");
}

VehicleParams ebs_params(const ScenarioConfig& c) {
  VehicleParams p;
  p.mass = c.ebs_mass;
  p.frame_size = c.frame_size;
  p.max_lift = c.max_lift;
  p.pos_p = c.pos_p;
  p.pos_d = c.pos_d;
  p.pos_i = c.pos_i;
  p.vel_p = c.vel_p;
  p.vel_i = c.vel_i;
  p.yaw_p = c.yaw_p;
  p.drag = c.drag;
  return p;
}

VehicleParams receiver_params(const ScenarioConfig& c) {
  VehicleParams p = ebs_params(c);
  p.mass = c.receiver_mass;
  return p;
}

CameraIntrinsics intrinsics(const ScenarioConfig& c) {
  CameraIntrinsics k;
  k.fx = c.camera_fx;
  k.fy = c.camera_fy;
  k.skew = c.camera_skew;
  k.cx = c.camera_cx;
  k.cy = c.camera_cy;
  k.width = c.camera_width;
  k.height = c.camera_height;
  k.fps = c.camera_fps;
  return k;
}

CameraMount camera_mount(const ScenarioConfig& c) {
  CameraMount m;
  m.tilt = deg2rad(c.camera_tilt_deg);
  return m;
}

CmpLayout layout(const ScenarioConfig& c) {
  return {c.layout_center_side, c.layout_satellite_side, c.layout_satellite_offset};
}

VisibilityEnvelope envelope(const ScenarioConfig& c) {
  VisibilityEnvelope e;
  e.min_view_angle = deg2rad(c.envelope_min_angle_deg);
  e.max_view_angle = deg2rad(c.envelope_max_angle_deg);
  e.reference_range = c.envelope_reference_range;
  e.reference_side = c.layout_center_side;
  return e;
}

NavParams nav_params(const ScenarioConfig& c) {
  NavParams p;
  p.thresholds.max_position_error = c.nav_max_position_error;
  p.thresholds.max_heading_error = c.nav_max_heading_error_deg;
  p.thresholds.lock_frames = c.nav_lock_frames;
  p.thresholds.lost_timeout = c.nav_lost_timeout;
  p.target_offset = Vec3(-c.standoff_horizontal, 0.0, c.standoff_vertical);
  p.align_gain = c.nav_align_gain;
  p.yaw_gain = c.nav_yaw_gain;
  p.max_speed = c.nav_max_speed;
  p.max_yaw_rate = c.nav_max_yaw_rate;
  p.vertical_first_gate = c.nav_vertical_first_gate;
  p.search_speed = c.nav_search_speed;
  p.search_leg_growth = c.nav_search_leg_growth;
  p.reacquire_height = c.nav_reacquire_height;
  p.detection_range = c.envelope_reference_range;
  p.mount = camera_mount(c);
  return p;
}

LinkModel link_model(const ScenarioConfig& c) { return {c.link_loss, c.link_latency, c.link_jitter}; }

SlideGeometry slide_geometry(const ScenarioConfig& c) {
  SlideGeometry g;
  g.ebs_slide_length = c.slide_ebs_length;
  g.receiver_slide_length = c.slide_receiver_length;
  g.incline = deg2rad(c.slide_incline_deg);
  g.open_time = c.slide_open_time;
  g.close_time = c.slide_close_time;
  return g;
}

BatterySpec battery_spec(const ScenarioConfig& c) { return {c.battery_mass, c.battery_friction}; }

LatchTolerance latch_tolerance(const ScenarioConfig& c) {
  return {c.latch_translation, deg2rad(c.latch_rotation_deg)};
}

DownwashTable downwash_table(const ScenarioConfig& c) {
  DownwashTable table({}, c.aero_push_coefficient);
  std::smatch m;
  for (const auto& [key, value] : c.aero_overrides) {
    if (!std::regex_match(key, m, aero_key_pattern())) continue;
    std::size_t i = 0;
    while (i < DownwashTable::kAltitudes.size() &&
           format_double(DownwashTable::kAltitudes[i]) != format_double(std::stod(m[1].str()))) {
      ++i;
    }
    const std::size_t j = m[2] == "0" ? 0 : m[2] == "50" ? 1 : 2;
    DownwashSample s = table.cell(i, j);
    if (m[3] == "delta_thrust") s.delta_thrust = value;
    else if (m[3] == "airflow_pos_a") s.airflow_pos_a = value;
    else s.airflow_pos_b = value;
    table.set_cell(i, j, s);
  }
  return table;
}

StandoffGeometry standoff(const ScenarioConfig& c) {
  return {c.standoff_horizontal, c.standoff_vertical};
}

CheckerConfig checker_config(const ScenarioConfig& c) {
  CheckerConfig k;
  k.loss_budget = c.experiment_loss_budget;
  k.max_depth = c.experiment_max_depth;
  k.frontier_cap = static_cast<std::size_t>(c.experiment_frontier_cap);
  k.timings = c.protocol;
  return k;
}

}  // namespace aerobridge
