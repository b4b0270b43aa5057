#pragma once

#include <cstdint>
#include <vector>

#include "aerobridge/scenario.hpp"

namespace aerobridge {

// Approach-trajectory comparison. Indoor conditions; the EBS starts
// `experiment_separation` behind and above the receiver and flies the chosen
// polyline to the docking point, then holds there for the window.

/// Max horizontal deviation of the receiver from its hold setpoint (m).
double trajectory_displacement(const ScenarioConfig& base, TrajectoryKind kind,
                               std::uint64_t seed);

struct TrajectoryStats {
  TrajectoryKind kind = TrajectoryKind::kVH;
  int iterations = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct TrajectoryExperiment {
  std::vector<TrajectoryStats> rows;  // H-V, H-H, V-V, V-H

  const TrajectoryStats& row(TrajectoryKind kind) const;
  bool vh_below_hh() const { return row(TrajectoryKind::kVH).mean < row(TrajectoryKind::kHH).mean; }
  bool vv_below_hv() const { return row(TrajectoryKind::kVV).mean < row(TrajectoryKind::kHV).mean; }
  bool ordering_holds() const { return vh_below_hh() && vv_below_hv(); }
};

/// Seeds 1..iterations per kind. Throws InvalidArgument when iterations < 2.
TrajectoryExperiment experiment_trajectories(const ScenarioConfig& base, int iterations);

// CMP accuracy. Closed-loop alignment from near the docking point with the
// heading taken from one forced marker pair. e and alpha are the values the
// CMP pipeline reports (estimated pose against the ideal docking pose),
// averaged over LOCK frames of the window that opens at the first LOCK. The
// steady-state values cover only the last `experiment_cmp_steady` seconds.

struct CmpTrial {
  bool locked = false;
  double lock_time = 0.0;  // s after start
  int frames = 0;          // LOCK frames averaged
  double e_cm = 0.0;
  double alpha_deg = 0.0;
  double true_e_cm = 0.0;  // ground-truth misalignment over the same frames
  double true_alpha_deg = 0.0;
  int steady_frames = 0;
  double steady_e_cm = 0.0;
  double steady_alpha_deg = 0.0;
};

CmpTrial cmp_trial(const ScenarioConfig& base, Association association, double noise_sigma,
                   std::uint64_t seed);

struct CmpRow {
  Association association = Association::kFrontBack;
  double noise_sigma = 0.0;
  int iterations = 0;
  int locked = 0;
  double mean_e_cm = 0.0;
  double mean_alpha_deg = 0.0;
  double mean_true_e_cm = 0.0;
  double mean_true_alpha_deg = 0.0;
  double mean_steady_e_cm = 0.0;
  double mean_steady_alpha_deg = 0.0;
};

struct CmpExperiment {
  std::vector<CmpRow> rows;  // Left-Back, Right-Back, Front-Back; noiseless then configured noise
};

/// Throws InvalidArgument when iterations < 2.
CmpExperiment experiment_cmp_accuracy(const ScenarioConfig& base, int iterations);

struct ProtocolExperiment {
  CheckReport nominal;
  CheckReport mutant;  // releases without waiting for SlideAck

  bool passed() const { return nominal.passed() && mutant.violations > 0; }
};

/// Throws InvalidArgument when the loss budget is outside [0, 3].
ProtocolExperiment experiment_protocol_check(const ScenarioConfig& base);

}  // namespace aerobridge
