#include "aerobridge/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "aerobridge/error.hpp"

namespace aerobridge {

bool SlideGeometry::is_valid() const {
  return ebs_slide_length > 0.0 && receiver_slide_length > 0.0 && incline > 0.0 &&
         incline < kPi / 2.0 && open_time > 0.0 && close_time > 0.0;
}

bool BatterySpec::is_valid() const { return mass > 0.0 && friction >= 0.0; }

bool latch_check(const FrameTransform& misalignment, const LatchTolerance& tolerance) {
  return misalignment.translation.norm() <= tolerance.max_translation &&
         rotation_angle(misalignment.rotation) <= tolerance.max_rotation;
}

double slide_acceleration(const SlideGeometry& geometry, const BatterySpec& battery, double g) {
  return g * (std::sin(geometry.incline) - battery.friction * std::cos(geometry.incline));
}

double slide_time(const SlideGeometry& geometry, const BatterySpec& battery, double g) {
  if (!geometry.is_valid() || !battery.is_valid() || !(g > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid slide geometry or battery");
  }
  if (battery.friction >= std::tan(geometry.incline)) {
    throw Error(ErrorCode::kStuckBattery, "friction holds the battery on the incline");
  }
  return std::sqrt(2.0 * geometry.total_length() / slide_acceleration(geometry, battery, g));
}

const char* to_string(TransferEvent e) {
  switch (e) {
    case TransferEvent::kSlidesOpen: return "slides_open";
    case TransferEvent::kLatch: return "latch";
    case TransferEvent::kRelease: return "release";
    case TransferEvent::kIrArrival: return "ir_arrival";
    case TransferEvent::kCloseStart: return "close_start";
    case TransferEvent::kSlidesClosed: return "slides_closed";
    case TransferEvent::kLatchLost: return "latch_lost";
  }
  return "?";
}

std::optional<double> TransferTimeline::time_of(TransferEvent e) const {
  for (const TimelineEntry& entry : events) {
    if (entry.event == e) return entry.t;
  }
  return std::nullopt;
}

double TransferTimeline::duration() const {
  const auto open = time_of(TransferEvent::kSlidesOpen);
  const auto closed = time_of(TransferEvent::kSlidesClosed);
  return open && closed ? *closed - *open : 0.0;
}

TransferProcess::TransferProcess(SlideGeometry geometry, BatterySpec battery, double servo_delay,
                                 LatchTolerance tolerance)
    : geometry_(geometry),
      battery_(battery),
      servo_delay_(servo_delay),
      tolerance_(tolerance),
      slide_time_(slide_time(geometry, battery)) {
  if (!(servo_delay >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "servo delay must be >= 0");
}

void TransferProcess::record(std::vector<TimelineEntry>& out, TransferEvent e, double t) {
  timeline_.events.push_back({e, t});
  out.push_back({e, t});
}

void TransferProcess::open(double now) {
  if (phase_ != Phase::kIdle) return;
  phase_ = Phase::kOpening;
  latch_ready_at_ = now + geometry_.open_time;
  timeline_.events.push_back({TransferEvent::kSlidesOpen, now});
}

void TransferProcess::request_release(double now) {
  if (!release_requested_) release_requested_ = now;
}

void TransferProcess::close(double now) {
  if (phase_ == Phase::kIdle || phase_ == Phase::kClosing || phase_ == Phase::kClosed) return;
  phase_ = Phase::kClosing;
  next_at_ = now + geometry_.close_time;
  timeline_.events.push_back({TransferEvent::kCloseStart, now});
}

std::vector<TimelineEntry> TransferProcess::advance(double now, const FrameTransform& misalignment) {
  std::vector<TimelineEntry> out;
  const bool latched = latch_check(misalignment, tolerance_);
  for (;;) {
    switch (phase_) {
      case Phase::kOpening:
        if (now < latch_ready_at_ || !latched) return out;
        record(out, TransferEvent::kLatch, std::max(latch_ready_at_, now));
        phase_ = Phase::kLatched;
        continue;
      case Phase::kLatched:
        if (!latched) {
          record(out, TransferEvent::kLatchLost, now);
          timeline_.battery_retained = true;
          phase_ = Phase::kLatchLost;
          return out;
        }
        if (!release_requested_) return out;
        next_at_ = std::max(*timeline_.time_of(TransferEvent::kLatch), *release_requested_) +
                   servo_delay_;
        phase_ = Phase::kReleasing;
        continue;
      case Phase::kReleasing:
        if (!latched) {
          record(out, TransferEvent::kLatchLost, now);
          timeline_.battery_retained = true;
          phase_ = Phase::kLatchLost;
          return out;
        }
        if (now < next_at_) return out;
        record(out, TransferEvent::kRelease, next_at_);
        next_at_ += slide_time_;
        phase_ = Phase::kSliding;
        continue;
      case Phase::kSliding:
        if (!latched) {
          record(out, TransferEvent::kLatchLost, now);
          phase_ = Phase::kLatchLost;
          return out;
        }
        if (now < next_at_) return out;
        record(out, TransferEvent::kIrArrival, next_at_);
        phase_ = Phase::kArrived;
        return out;
      case Phase::kClosing:
        if (now < next_at_) return out;
        record(out, TransferEvent::kSlidesClosed, next_at_);
        timeline_.completed = timeline_.time_of(TransferEvent::kIrArrival).has_value();
        phase_ = Phase::kClosed;
        return out;
      case Phase::kIdle:
      case Phase::kArrived:
      case Phase::kClosed:
      case Phase::kLatchLost:
        return out;
    }
  }
}

TransferTimeline run_transfer(const SlideGeometry& geometry, const BatterySpec& battery,
                              const std::function<FrameTransform(double)>& misalignment,
                              double servo_delay, double dt, const LatchTolerance& tolerance) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  TransferProcess process(geometry, battery, servo_delay, tolerance);
  process.open(0.0);
  process.request_release(0.0);
  const double horizon =
      geometry.open_time + servo_delay + process.slide_duration() + geometry.close_time + 10.0;
  for (long i = 1; process.phase() != TransferProcess::Phase::kClosed; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (t > horizon) break;
    for (const TimelineEntry& e : process.advance(t, misalignment(t))) {
      if (e.event == TransferEvent::kIrArrival) process.close(e.t);
      if (e.event == TransferEvent::kLatchLost) return process.timeline();
    }
    // Closing has no latch requirement; finish it exactly.
    if (process.phase() == TransferProcess::Phase::kClosing) {
      process.advance(*process.timeline().time_of(TransferEvent::kCloseStart) +
                          geometry.close_time,
                      FrameTransform{});
    }
  }
  return process.timeline();
}

}  // namespace aerobridge
