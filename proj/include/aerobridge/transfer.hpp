#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "aerobridge/geometry.hpp"

namespace aerobridge {

struct SlideGeometry {
  double ebs_slide_length = 0.230;       // m
  double receiver_slide_length = 0.210;  // m
  double incline = deg2rad(45.0);
  double open_time = 1.5;                // s, actuation
  double close_time = 1.5;               // s, actuation

  double total_length() const { return ebs_slide_length + receiver_slide_length; }
  bool is_valid() const;
};

struct BatterySpec {
  double mass = 0.4;      // kg
  double friction = 0.2;  // coefficient against the slide surface

  bool is_valid() const;
};

/// Magnetic capture envelope of the slide tips.
struct LatchTolerance {
  double max_translation = 0.03;           // m
  double max_rotation = deg2rad(10.0);     // rad
};

/// `misalignment` is the slide-tip pose relative to the receiver mouth; the
/// identity is perfect alignment.
bool latch_check(const FrameTransform& misalignment, const LatchTolerance& tolerance = {});

/// Along-slope acceleration g (sin t - mu cos t).
double slide_acceleration(const SlideGeometry& geometry, const BatterySpec& battery,
                          double g = kGravity);

/// Time to slide the full length from rest. Throws StuckBattery when
/// mu >= tan(incline).
double slide_time(const SlideGeometry& geometry, const BatterySpec& battery, double g = kGravity);

enum class TransferEvent { kSlidesOpen, kLatch, kRelease, kIrArrival, kCloseStart, kSlidesClosed,
                           kLatchLost };

const char* to_string(TransferEvent e);

struct TimelineEntry {
  TransferEvent event;
  double t;
};

struct TransferTimeline {
  std::vector<TimelineEntry> events;
  bool completed = false;         // slides closed after an arrival
  bool battery_retained = false;  // latch lost before release

  std::optional<double> time_of(TransferEvent e) const;
  /// slides_closed - slides_open; zero when either is missing.
  double duration() const;
};

/// Open / latch / release / slide / close sequence stepped by the simulation
/// clock. Event times are exact; they are reported by the first advance() at
/// or after them.
class TransferProcess {
 public:
  enum class Phase { kIdle, kOpening, kLatched, kReleasing, kSliding, kArrived, kClosing, kClosed,
                     kLatchLost };

  TransferProcess(SlideGeometry geometry, BatterySpec battery, double servo_delay = 0.05,
                  LatchTolerance tolerance = {});

  void open(double now);
  /// Release authorized; the servo fires once latched.
  void request_release(double now);
  void close(double now);

  /// Processes everything scheduled up to `now`; `misalignment` is the current
  /// tip-to-mouth pose. Returns the new timeline entries.
  std::vector<TimelineEntry> advance(double now, const FrameTransform& misalignment);

  Phase phase() const { return phase_; }
  const TransferTimeline& timeline() const { return timeline_; }
  double slide_duration() const { return slide_time_; }

 private:
  void record(std::vector<TimelineEntry>& out, TransferEvent e, double t);

  SlideGeometry geometry_;
  BatterySpec battery_;
  double servo_delay_;
  LatchTolerance tolerance_;
  double slide_time_;
  Phase phase_ = Phase::kIdle;
  std::optional<double> release_requested_;
  double latch_ready_at_ = 0.0;
  double next_at_ = 0.0;
  TransferTimeline timeline_;
};

/// Runs a complete handoff on its own clock, sampling `misalignment(t)` every
/// `dt`. Release is authorized at open; closing starts on arrival. A lost latch
/// truncates the timeline.
TransferTimeline run_transfer(const SlideGeometry& geometry, const BatterySpec& battery,
                              const std::function<FrameTransform(double)>& misalignment,
                              double servo_delay = 0.05, double dt = 0.01,
                              const LatchTolerance& tolerance = {});

}  // namespace aerobridge
