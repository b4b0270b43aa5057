#pragma once

#include <string>

#include "aerobridge/experiments.hpp"
#include "aerobridge/scenario.hpp"

namespace aerobridge {

enum class ReportFormat { kCsv, kJson };

// Every CSV starts with one "# aerobridge <table> v<N>" comment line, then the
// column header. Numbers are printed with fixed precision so identical runs
// give identical bytes.

std::string trace_csv(const RunReport& report);
std::string events_csv(const RunReport& report);
std::string observations_csv(const RunReport& report);
std::string nav_log_csv(const RunReport& report);
std::string summary_json(const RunSummary& summary);

/// JSON array of the per-tick trace, same fields as trace.csv.
std::string trace_json(const RunReport& report);
std::string events_json(const RunReport& report);

/// Writes summary.json plus trace, events, observations and nav_log tables in
/// the requested format. Creates `dir` if needed; throws IoError.
void write_run_report(const RunReport& report, const std::string& dir, ReportFormat format);

std::string trajectory_csv(const TrajectoryExperiment& experiment);
std::string trajectory_json(const TrajectoryExperiment& experiment);
std::string cmp_csv(const CmpExperiment& experiment);
std::string cmp_json(const CmpExperiment& experiment);
std::string protocol_csv(const ProtocolExperiment& experiment);
std::string protocol_json(const ProtocolExperiment& experiment);

/// Writes `<name>.csv` or `<name>.json` into `dir`.
void write_text_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace aerobridge
