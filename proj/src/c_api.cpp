#include "aerobridge/aerobridge.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <variant>

#include "aerobridge/config.hpp"
#include "aerobridge/error.hpp"
#include "aerobridge/experiments.hpp"
#include "aerobridge/report.hpp"
#include "aerobridge/scenario.hpp"

struct ab_config {
  aerobridge::ScenarioConfig value;
};

struct ab_run {
  aerobridge::RunReport report;
};

struct ab_experiment {
  std::variant<aerobridge::TrajectoryExperiment, aerobridge::CmpExperiment,
               aerobridge::ProtocolExperiment>
      result;
};

namespace {

thread_local std::string g_last_error;

ab_status fail(ab_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

ab_status from_code(aerobridge::ErrorCode code) {
  return static_cast<ab_status>(static_cast<int>(code));
}

// Runs `body`, translating exceptions into status codes.
template <class F>
ab_status guarded(F&& body) {
  try {
    return body();
  } catch (const aerobridge::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(AB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(AB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(AB_ERR_INTERNAL, "unknown exception");
  }
}

ab_status copy_text(const std::string& text, char* buffer, std::size_t capacity,
                    std::size_t* length) {
  if (length) *length = text.size();
  if (buffer && capacity > 0) {
    const std::size_t n = text.size() < capacity - 1 ? text.size() : capacity - 1;
    std::memcpy(buffer, text.data(), n);
    buffer[n] = '\0';
  }
  return AB_OK;
}

aerobridge::ReportFormat to_format(ab_format f) {
  return f == AB_FORMAT_JSON ? aerobridge::ReportFormat::kJson : aerobridge::ReportFormat::kCsv;
}

bool valid_format(ab_format f) { return f == AB_FORMAT_CSV || f == AB_FORMAT_JSON; }

ab_outcome outcome_of(const std::string& s) {
  if (s == "TransferDone") return AB_OUTCOME_TRANSFER_DONE;
  if (s == "Aborted") return AB_OUTCOME_ABORTED;
  if (s == "Timeout") return AB_OUTCOME_TIMEOUT;
  return AB_OUTCOME_ERROR;
}

std::string experiment_text(const ab_experiment& x, ab_format format) {
  const bool json = format == AB_FORMAT_JSON;
  if (const auto* t = std::get_if<aerobridge::TrajectoryExperiment>(&x.result)) {
    return json ? aerobridge::trajectory_json(*t) : aerobridge::trajectory_csv(*t);
  }
  if (const auto* c = std::get_if<aerobridge::CmpExperiment>(&x.result)) {
    return json ? aerobridge::cmp_json(*c) : aerobridge::cmp_csv(*c);
  }
  const auto& p = std::get<aerobridge::ProtocolExperiment>(x.result);
  return json ? aerobridge::protocol_json(p) : aerobridge::protocol_csv(p);
}

const char* experiment_name(const ab_experiment& x) {
  switch (x.result.index()) {
    case 0: return "trajectories";
    case 1: return "cmp";
    default: return "protocol";
  }
}

}  // namespace

extern "C" {

const char* ab_version(void) { return "0.1.0"; }

const char* ab_status_name(ab_status status) {
  switch (status) {
    case AB_OK: return "Ok";
    case AB_ERR_NULL_HANDLE: return "NullHandle";
    case AB_ERR_INTERNAL: return "Internal";
    default: break;
  }
  if (status >= AB_ERR_INVALID_ARGUMENT && status <= AB_ERR_IO) {
    return aerobridge::to_string(static_cast<aerobridge::ErrorCode>(status));
  }
  return "Unknown";
}

const char* ab_last_error_message(void) { return g_last_error.c_str(); }

ab_status ab_config_create_default(ab_config** out) {
  if (!out) return fail(AB_ERR_NULL_HANDLE, "out is null");
  *out = nullptr;
  return guarded([&] {
    *out = new ab_config{};
    return AB_OK;
  });
}

ab_status ab_config_parse(const char* text, ab_config** out) {
  if (!text || !out) return fail(AB_ERR_NULL_HANDLE, "text or out is null");
  *out = nullptr;
  return guarded([&] {
    *out = new ab_config{aerobridge::parse_config(text)};
    return AB_OK;
  });
}

ab_status ab_config_load(const char* path, ab_config** out) {
  if (!path || !out) return fail(AB_ERR_NULL_HANDLE, "path or out is null");
  *out = nullptr;
  return guarded([&] {
    *out = new ab_config{aerobridge::load_config(path)};
    return AB_OK;
  });
}

ab_status ab_config_validate(const ab_config* config) {
  if (!config) return fail(AB_ERR_NULL_HANDLE, "config is null");
  return guarded([&] {
    aerobridge::validate_config(config->value);
    return AB_OK;
  });
}

ab_status ab_config_set_seed(ab_config* config, uint64_t seed) {
  if (!config) return fail(AB_ERR_NULL_HANDLE, "config is null");
  config->value.seed = seed;
  return AB_OK;
}

ab_status ab_config_get_seed(const ab_config* config, uint64_t* seed) {
  if (!config || !seed) return fail(AB_ERR_NULL_HANDLE, "config or seed is null");
  *seed = config->value.seed;
  return AB_OK;
}

ab_status ab_config_serialize(const ab_config* config, char* buffer, size_t capacity,
                              size_t* length) {
  if (!config) return fail(AB_ERR_NULL_HANDLE, "config is null");
  return guarded(
      [&] { return copy_text(aerobridge::serialize_config(config->value), buffer, capacity, length); });
}

void ab_config_free(ab_config* config) { delete config; }

ab_status ab_run_scenario(const ab_config* config, ab_run** out) {
  if (!config || !out) return fail(AB_ERR_NULL_HANDLE, "config or out is null");
  *out = nullptr;
  return guarded([&] {
    // run_scenario folds module failures into the report; configuration
    // problems are reported as a status instead.
    aerobridge::validate_config(config->value);
    *out = new ab_run{aerobridge::run_scenario(config->value)};
    return AB_OK;
  });
}

ab_status ab_run_get_summary(const ab_run* run, ab_run_summary* out) {
  if (!run || !out) return fail(AB_ERR_NULL_HANDLE, "run or out is null");
  const aerobridge::RunSummary& s = run->report.summary;
  *out = ab_run_summary{};
  out->seed = s.seed;
  out->success = s.success ? 1 : 0;
  out->outcome = outcome_of(s.outcome);
  out->sim_time = s.sim_time;
  out->has_lock_time = s.lock_time ? 1 : 0;
  out->lock_time = s.lock_time.value_or(0.0);
  out->has_transfer_duration = s.transfer_duration ? 1 : 0;
  out->transfer_duration = s.transfer_duration.value_or(0.0);
  out->max_displacement = s.max_displacement;
  out->messages_sent = s.messages_sent;
  out->messages_dropped = s.messages_dropped;
  out->batteries_left = s.batteries_left;
  return AB_OK;
}

ab_status ab_run_get_reason(const ab_run* run, char* buffer, size_t capacity, size_t* length) {
  if (!run) return fail(AB_ERR_NULL_HANDLE, "run is null");
  return guarded([&] { return copy_text(run->report.summary.reason, buffer, capacity, length); });
}

ab_status ab_run_get_artifact(const ab_run* run, ab_artifact artifact, ab_format format,
                              char* buffer, size_t capacity, size_t* length) {
  if (!run) return fail(AB_ERR_NULL_HANDLE, "run is null");
  if (!valid_format(format)) return fail(AB_ERR_INVALID_ARGUMENT, "unknown format");
  return guarded([&] {
    const aerobridge::RunReport& r = run->report;
    const bool json = format == AB_FORMAT_JSON;
    std::string text;
    switch (artifact) {
      case AB_ARTIFACT_TRACE: text = json ? trace_json(r) : trace_csv(r); break;
      case AB_ARTIFACT_EVENTS: text = json ? events_json(r) : events_csv(r); break;
      case AB_ARTIFACT_OBSERVATIONS:
        if (json) return fail(AB_ERR_INVALID_ARGUMENT, "observations are CSV only");
        text = observations_csv(r);
        break;
      case AB_ARTIFACT_NAV_LOG:
        if (json) return fail(AB_ERR_INVALID_ARGUMENT, "nav log is CSV only");
        text = nav_log_csv(r);
        break;
      case AB_ARTIFACT_SUMMARY: text = summary_json(r.summary); break;
      default: return fail(AB_ERR_INVALID_ARGUMENT, "unknown artifact");
    }
    return copy_text(text, buffer, capacity, length);
  });
}

ab_status ab_run_write(const ab_run* run, const char* directory, ab_format format) {
  if (!run || !directory) return fail(AB_ERR_NULL_HANDLE, "run or directory is null");
  if (!valid_format(format)) return fail(AB_ERR_INVALID_ARGUMENT, "unknown format");
  return guarded([&] {
    aerobridge::write_run_report(run->report, directory, to_format(format));
    return AB_OK;
  });
}

void ab_run_free(ab_run* run) { delete run; }

ab_status ab_experiment_run(const ab_config* config, ab_experiment_kind kind, int iterations,
                            ab_experiment** out) {
  if (!config || !out) return fail(AB_ERR_NULL_HANDLE, "config or out is null");
  *out = nullptr;
  return guarded([&] {
    const aerobridge::ScenarioConfig& c = config->value;
    aerobridge::validate_config(c);
    switch (kind) {
      case AB_EXPERIMENT_TRAJECTORIES:
        *out = new ab_experiment{aerobridge::experiment_trajectories(
            c, iterations > 0 ? iterations : c.experiment_trajectory_iterations)};
        return AB_OK;
      case AB_EXPERIMENT_CMP:
        *out = new ab_experiment{aerobridge::experiment_cmp_accuracy(
            c, iterations > 0 ? iterations : c.experiment_cmp_iterations)};
        return AB_OK;
      case AB_EXPERIMENT_PROTOCOL:
        *out = new ab_experiment{aerobridge::experiment_protocol_check(c)};
        return AB_OK;
    }
    return fail(AB_ERR_INVALID_ARGUMENT, "unknown experiment kind");
  });
}

ab_status ab_experiment_passed(const ab_experiment* experiment, int* passed) {
  if (!experiment || !passed) return fail(AB_ERR_NULL_HANDLE, "experiment or passed is null");
  bool ok = false;
  if (const auto* t = std::get_if<aerobridge::TrajectoryExperiment>(&experiment->result)) {
    ok = t->ordering_holds();
  } else if (const auto* c = std::get_if<aerobridge::CmpExperiment>(&experiment->result)) {
    ok = true;
    for (const aerobridge::CmpRow& r : c->rows) ok = ok && r.locked == r.iterations;
  } else {
    ok = std::get<aerobridge::ProtocolExperiment>(experiment->result).passed();
  }
  *passed = ok ? 1 : 0;
  return AB_OK;
}

ab_status ab_experiment_get_text(const ab_experiment* experiment, ab_format format, char* buffer,
                                 size_t capacity, size_t* length) {
  if (!experiment) return fail(AB_ERR_NULL_HANDLE, "experiment is null");
  if (!valid_format(format)) return fail(AB_ERR_INVALID_ARGUMENT, "unknown format");
  return guarded(
      [&] { return copy_text(experiment_text(*experiment, format), buffer, capacity, length); });
}

ab_status ab_experiment_write(const ab_experiment* experiment, const char* directory,
                              ab_format format) {
  if (!experiment || !directory) return fail(AB_ERR_NULL_HANDLE, "experiment or directory is null");
  if (!valid_format(format)) return fail(AB_ERR_INVALID_ARGUMENT, "unknown format");
  return guarded([&] {
    const std::string name =
        std::string(experiment_name(*experiment)) + (format == AB_FORMAT_JSON ? ".json" : ".csv");
    aerobridge::write_text_file(directory, name, experiment_text(*experiment, format));
    return AB_OK;
  });
}

void ab_experiment_free(ab_experiment* experiment) { delete experiment; }

}  // extern "C"
