#include "aerobridge/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aerobridge/error.hpp"

namespace aerobridge {
namespace {

using nlohmann::ordered_json;

std::string num(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s(buf);
  // "-0.000000" and "0.000000" are the same value.
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

// Quotes a field when it holds a separator, quote or newline.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double rounded(double v, int precision = 6) { return std::stod(num(v, precision)); }

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(rounded(*v)) : ordered_json(nullptr);
}

ordered_json trace_row_json(const TraceRow& r) {
  ordered_json j;
  j["t"] = rounded(r.t, 3);
  j["x"] = rounded(r.ebs_position.x());
  j["y"] = rounded(r.ebs_position.y());
  j["z"] = rounded(r.ebs_position.z());
  j["e_cm"] = r.has_errors ? ordered_json(rounded(r.e_cm, 4)) : ordered_json(nullptr);
  j["alpha_deg"] = r.has_errors ? ordered_json(rounded(r.alpha_deg, 4)) : ordered_json(nullptr);
  j["phase"] = r.nav_active ? to_string(r.phase) : "-";
  j["ebs_state"] = to_string(r.ebs_state);
  j["rec_state"] = to_string(r.receiver_state);
  return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string trace_csv(const RunReport& report) {
  std::ostringstream out;
  out << "# aerobridge trace v1\n";
  out << "t,x,y,z,e_cm,alpha_deg,phase,ebs_state,rec_state\n";
  for (const TraceRow& r : report.trace) {
    out << num(r.t, 3) << ',' << num(r.ebs_position.x()) << ',' << num(r.ebs_position.y()) << ','
        << num(r.ebs_position.z()) << ',' << (r.has_errors ? num(r.e_cm, 4) : "") << ','
        << (r.has_errors ? num(r.alpha_deg, 4) : "") << ','
        << (r.nav_active ? to_string(r.phase) : "-") << ',' << to_string(r.ebs_state) << ','
        << to_string(r.receiver_state) << '\n';
  }
  return out.str();
}

std::string events_csv(const RunReport& report) {
  std::ostringstream out;
  out << "# aerobridge events v1\n";
  out << "t,source,event,detail\n";
  for (const EventRow& r : report.events) {
    out << num(r.t, 3) << ',' << field(r.source) << ',' << field(r.event) << ','
        << field(r.detail) << '\n';
  }
  return out.str();
}

std::string observations_csv(const RunReport& report) {
  std::ostringstream out;
  out << "# aerobridge observations v1\n";
  out << "run_id,t,marker_id,detected,range,view_angle_deg";
  for (int i = 0; i < 4; ++i) out << ",u" << i << ",v" << i;
  out << ",est_x,est_y,est_z,est_heading_deg\n";
  for (const ObservationRow& r : report.observations) {
    const MarkerObservation& o = r.observation;
    out << report.summary.seed << ',' << num(r.t, 3) << ',' << to_string(o.id) << ','
        << (o.detected ? 1 : 0) << ',' << num(o.range) << ',' << num(rad2deg(o.view_angle), 4);
    for (const Pixel& p : o.corners) out << ',' << num(p.x(), 4) << ',' << num(p.y(), 4);
    if (r.has_estimate) {
      out << ',' << num(r.est_position.x()) << ',' << num(r.est_position.y()) << ','
          << num(r.est_position.z()) << ',' << num(rad2deg(r.est_heading), 4);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string nav_log_csv(const RunReport& report) {
  std::ostringstream out;
  out << "# aerobridge nav_log v1\n";
  out << "t,phase,detected,e_cm,alpha_deg,vx,vy,vz,yaw_rate\n";
  for (const NavLogRow& r : report.nav_log) {
    out << num(r.t, 3) << ',' << to_string(r.phase) << ',' << (r.detected ? 1 : 0) << ','
        << num(r.e_cm, 4) << ',' << num(r.alpha_deg, 4) << ',' << num(r.command.velocity.x()) << ','
        << num(r.command.velocity.y()) << ',' << num(r.command.velocity.z()) << ','
        << num(r.command.yaw_rate) << '\n';
  }
  return out.str();
}

std::string summary_json(const RunSummary& s) {
  ordered_json j;
  j["format"] = "aerobridge summary v1";
  j["seed"] = s.seed;
  j["success"] = s.success;
  j["outcome"] = s.outcome;
  j["reason"] = s.reason;
  j["sim_time"] = rounded(s.sim_time, 3);
  j["lock_time"] = optional_number(s.lock_time);
  j["transfer_duration"] = optional_number(s.transfer_duration);
  ordered_json timeline = ordered_json::array();
  if (s.timeline) {
    for (const TimelineEntry& e : s.timeline->events) {
      timeline.push_back({{"event", to_string(e.event)}, {"t", rounded(e.t)}});
    }
  }
  j["timeline"] = timeline;
  j["max_displacement"] = rounded(s.max_displacement);
  j["lock_mean_e_cm"] = optional_number(s.lock_mean_e_cm);
  j["lock_mean_alpha_deg"] = optional_number(s.lock_mean_alpha_deg);
  j["messages_sent"] = s.messages_sent;
  j["messages_dropped"] = s.messages_dropped;
  j["batteries_left"] = s.batteries_left;
  return dump(j);
}

std::string trace_json(const RunReport& report) {
  ordered_json rows = ordered_json::array();
  for (const TraceRow& r : report.trace) rows.push_back(trace_row_json(r));
  return dump(rows);
}

std::string events_json(const RunReport& report) {
  ordered_json rows = ordered_json::array();
  for (const EventRow& r : report.events) {
    rows.push_back({{"t", rounded(r.t, 3)},
                    {"source", r.source},
                    {"event", r.event},
                    {"detail", r.detail}});
  }
  return dump(rows);
}

void write_text_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

void write_run_report(const RunReport& report, const std::string& dir, ReportFormat format) {
  write_text_file(dir, "summary.json", summary_json(report.summary));
  if (format == ReportFormat::kJson) {
    write_text_file(dir, "trace.json", trace_json(report));
    write_text_file(dir, "events.json", events_json(report));
  } else {
    write_text_file(dir, "trace.csv", trace_csv(report));
    write_text_file(dir, "events.csv", events_csv(report));
  }
  write_text_file(dir, "observations.csv", observations_csv(report));
  write_text_file(dir, "nav_log.csv", nav_log_csv(report));
}

std::string trajectory_csv(const TrajectoryExperiment& x) {
  std::ostringstream out;
  out << "# aerobridge trajectories v1\n";
  out << "kind,iterations,mean_m,min_m,max_m\n";
  for (const TrajectoryStats& s : x.rows) {
    out << to_string(s.kind) << ',' << s.iterations << ',' << num(s.mean) << ',' << num(s.min)
        << ',' << num(s.max) << '\n';
  }
  return out.str();
}

std::string trajectory_json(const TrajectoryExperiment& x) {
  ordered_json j;
  j["format"] = "aerobridge trajectories v1";
  j["rows"] = ordered_json::array();
  for (const TrajectoryStats& s : x.rows) {
    j["rows"].push_back({{"kind", to_string(s.kind)},
                         {"iterations", s.iterations},
                         {"mean_m", rounded(s.mean)},
                         {"min_m", rounded(s.min)},
                         {"max_m", rounded(s.max)}});
  }
  j["vh_below_hh"] = x.vh_below_hh();
  j["vv_below_hv"] = x.vv_below_hv();
  j["ordering_holds"] = x.ordering_holds();
  return dump(j);
}

std::string cmp_csv(const CmpExperiment& x) {
  std::ostringstream out;
  out << "# aerobridge cmp v1\n";
  out << "association,noise_px,iterations,locked,e_cm,alpha_deg,true_e_cm,true_alpha_deg,"
         "steady_e_cm,steady_alpha_deg\n";
  for (const CmpRow& r : x.rows) {
    out << to_string(r.association) << ',' << num(r.noise_sigma, 3) << ',' << r.iterations << ','
        << r.locked << ',' << num(r.mean_e_cm, 4) << ',' << num(r.mean_alpha_deg, 4) << ','
        << num(r.mean_true_e_cm, 4) << ',' << num(r.mean_true_alpha_deg, 4) << ','
        << num(r.mean_steady_e_cm, 4) << ',' << num(r.mean_steady_alpha_deg, 4) << '\n';
  }
  return out.str();
}

std::string cmp_json(const CmpExperiment& x) {
  ordered_json j;
  j["format"] = "aerobridge cmp v1";
  j["rows"] = ordered_json::array();
  for (const CmpRow& r : x.rows) {
    j["rows"].push_back({{"association", to_string(r.association)},
                         {"noise_px", rounded(r.noise_sigma, 3)},
                         {"iterations", r.iterations},
                         {"locked", r.locked},
                         {"e_cm", rounded(r.mean_e_cm, 4)},
                         {"alpha_deg", rounded(r.mean_alpha_deg, 4)},
                         {"true_e_cm", rounded(r.mean_true_e_cm, 4)},
                         {"true_alpha_deg", rounded(r.mean_true_alpha_deg, 4)},
                         {"steady_e_cm", rounded(r.mean_steady_e_cm, 4)},
                         {"steady_alpha_deg", rounded(r.mean_steady_alpha_deg, 4)}});
  }
  return dump(j);
}

namespace {

ordered_json check_json(const CheckReport& r) {
  ordered_json j;
  j["complete"] = r.complete;
  j["state_explosion"] = r.state_explosion;
  j["states"] = r.states;
  j["transitions"] = r.transitions;
  j["terminal_states"] = r.terminal_states;
  j["success_terminals"] = r.success_terminals;
  j["aborted_terminals"] = r.aborted_terminals;
  j["violations"] = r.violations;
  j["max_depth_seen"] = r.max_depth_seen;
  j["counterexamples"] = ordered_json::array();
  for (const Counterexample& c : r.counterexamples) {
    j["counterexamples"].push_back({{"property", c.property}, {"trace", c.trace}});
  }
  return j;
}

void check_csv_row(std::ostringstream& out, const char* name, const CheckReport& r) {
  out << name << ',' << (r.complete ? 1 : 0) << ',' << (r.state_explosion ? 1 : 0) << ','
      << r.states << ',' << r.transitions << ',' << r.terminal_states << ','
      << r.success_terminals << ',' << r.aborted_terminals << ',' << r.violations << ','
      << r.max_depth_seen << ',' << (r.passed() ? "PASS" : "FAIL") << '\n';
}

}  // namespace

std::string protocol_csv(const ProtocolExperiment& x) {
  std::ostringstream out;
  out << "# aerobridge protocol v1\n";
  out << "model,complete,state_explosion,states,transitions,terminal_states,success_terminals,"
         "aborted_terminals,violations,max_depth,verdict\n";
  check_csv_row(out, "nominal", x.nominal);
  check_csv_row(out, "mutant_release_without_ack", x.mutant);
  return out.str();
}

std::string protocol_json(const ProtocolExperiment& x) {
  ordered_json j;
  j["format"] = "aerobridge protocol v1";
  j["passed"] = x.passed();
  j["nominal"] = check_json(x.nominal);
  j["mutant_release_without_ack"] = check_json(x.mutant);
  return dump(j);
}

}  // namespace aerobridge
