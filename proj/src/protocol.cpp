#include "aerobridge/protocol.hpp"

#include <algorithm>

#include "aerobridge/error.hpp"

namespace aerobridge {
namespace {

ProtocolMessage make_message(MessageKind kind, Party sender, std::uint32_t& seq, double now) {
  ProtocolMessage m;
  m.kind = kind;
  m.sender = sender;
  m.seq = seq++;
  m.send_time = now;
  return m;
}

bool is_message(const ProtocolEvent& ev, MessageKind kind) {
  return ev.kind == EventKind::kMessage && ev.message.kind == kind;
}

// First transmission of a message that is retransmitted until answered.
void arm_retransmit(std::optional<double>& at, int& attempts, double now,
                    const ProtocolTimings& t) {
  attempts = 1;
  at.reset();
  if (t.retransmit && t.max_attempts > 1) at = now + t.retransmit_interval;
}

// Returns true when another copy should go out.
bool next_retransmit(std::optional<double>& at, int& attempts, double now,
                     const ProtocolTimings& t) {
  if (attempts >= t.max_attempts) {
    at.reset();
    return false;
  }
  ++attempts;
  at.reset();
  if (attempts < t.max_attempts) at = now + t.retransmit_interval;
  return true;
}

}  // namespace

const char* to_string(Party p) { return p == Party::kEbs ? "ebs" : "receiver"; }

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::kBatteryRequest: return "BatteryRequest";
    case MessageKind::kVerification: return "Verification";
    case MessageKind::kLockConfirmed: return "LockConfirmed";
    case MessageKind::kSlideSyncOpen: return "SlideSync(open)";
    case MessageKind::kSlideSyncClose: return "SlideSync(close)";
    case MessageKind::kSlideAck: return "SlideAck";
    case MessageKind::kBatteryReleased: return "BatteryReleased";
    case MessageKind::kTransferDone: return "TransferDone";
    case MessageKind::kAbort: return "Abort";
  }
  return "?";
}

const char* to_string(EbsState s) {
  switch (s) {
    case EbsState::kIdle: return "Idle";
    case EbsState::kVerifying: return "Verifying";
    case EbsState::kEnroute: return "Enroute";
    case EbsState::kSearching: return "Searching";
    case EbsState::kAligning: return "Aligning";
    case EbsState::kLocked: return "Locked";
    case EbsState::kSlidesOpening: return "SlidesOpening";
    case EbsState::kTransferring: return "Transferring";
    case EbsState::kClosing: return "Closing";
    case EbsState::kReturningHome: return "ReturningHome";
    case EbsState::kAborted: return "Aborted";
  }
  return "?";
}

const char* to_string(ReceiverState s) {
  switch (s) {
    case ReceiverState::kMission: return "Mission";
    case ReceiverState::kLowBattery: return "LowBattery";
    case ReceiverState::kAwaitingVerification: return "AwaitingVerification";
    case ReceiverState::kPositionHold: return "PositionHold";
    case ReceiverState::kSlidesOpen: return "SlidesOpen";
    case ReceiverState::kReceiving: return "Receiving";
    case ReceiverState::kReceived: return "Received";
    case ReceiverState::kAborted: return "Aborted";
  }
  return "?";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::kMessage: return "message";
    case EventKind::kRetransmitTimer: return "retransmit-timer";
    case EventKind::kTimeout: return "timeout";
    case EventKind::kBatteryLow: return "battery-low";
    case EventKind::kNavArrived: return "nav-arrived";
    case EventKind::kNavDetected: return "nav-detected";
    case EventKind::kNavLocked: return "nav-locked";
    case EventKind::kNavUnlocked: return "nav-unlocked";
    case EventKind::kNavLost: return "nav-lost";
    case EventKind::kInternalGo: return "internal-go";
    case EventKind::kReleaseDone: return "release-done";
    case EventKind::kNoBattery: return "no-battery";
    case EventKind::kIrArrival: return "ir-arrival";
    case EventKind::kSlidesClosed: return "slides-closed";
  }
  return "?";
}

const char* to_string(Action a) {
  switch (a) {
    case Action::kStartEnroute: return "start-enroute";
    case Action::kStartSearch: return "start-search";
    case Action::kOpenSlides: return "open-slides";
    case Action::kRelease: return "release";
    case Action::kCloseSlides: return "close-slides";
    case Action::kReturnHome: return "return-home";
    case Action::kEngagePositionHold: return "engage-position-hold";
    case Action::kResumeMission: return "resume-mission";
    case Action::kAbortHandoff: return "abort-handoff";
  }
  return "?";
}

bool ProtocolTimings::is_valid() const {
  return retransmit_interval > 0.0 && max_attempts >= 1 && verification_timeout > 0.0 &&
         lock_timeout > 0.0 && slide_ack_timeout > 0.0 && release_window > 0.0 &&
         transfer_timeout > 0.0 && hold_timeout > 0.0 && receive_timeout > 0.0 &&
         low_battery_threshold >= 0.0 && low_battery_threshold <= 100.0;
}

bool is_terminal(EbsState s) { return s == EbsState::kReturningHome || s == EbsState::kAborted; }

bool is_terminal(ReceiverState s) {
  return s == ReceiverState::kReceived || s == ReceiverState::kAborted;
}

EbsStep ebs_fsm_step(const EbsFsm& fsm, const ProtocolEvent& ev, double now,
                     const ProtocolTimings& t) {
  EbsStep out{fsm, {}, {}, false};
  EbsFsm& f = out.fsm;
  auto emit = [&](MessageKind kind) {
    out.outgoing.push_back(make_message(kind, Party::kEbs, f.next_seq, now));
  };
  auto abort = [&](const char* reason) {
    if (f.state == EbsState::kSlidesOpening || f.state == EbsState::kTransferring) {
      out.actions.push_back(Action::kCloseSlides);
    }
    f.state = EbsState::kAborted;
    f.retransmit_at.reset();
    f.timeout_at.reset();
    emit(MessageKind::kAbort);
    out.outgoing.back().reason = reason;
    out.actions.push_back(Action::kAbortHandoff);
  };
  auto release = [&]() {
    f.released = true;
    ++f.releases;
    out.actions.push_back(Action::kRelease);
  };

  if (is_message(ev, MessageKind::kAbort) && !is_terminal(f.state) && f.state != EbsState::kIdle) {
    if (f.state == EbsState::kSlidesOpening || f.state == EbsState::kTransferring) {
      out.actions.push_back(Action::kCloseSlides);
    }
    f.state = EbsState::kAborted;
    f.retransmit_at.reset();
    f.timeout_at.reset();
    out.actions.push_back(Action::kAbortHandoff);
    return out;
  }

  bool handled = true;
  switch (f.state) {
    case EbsState::kIdle:
      if (is_message(ev, MessageKind::kBatteryRequest)) {
        f.receiver_gps = ev.message.gps;
        f.receiver_altitude = ev.message.altitude;
        f.receiver_heading = ev.message.heading;
        f.state = EbsState::kVerifying;
        emit(MessageKind::kVerification);
        arm_retransmit(f.retransmit_at, f.attempts, now, t);
        f.timeout_at = now + t.verification_timeout;
      } else {
        handled = false;
      }
      break;

    case EbsState::kVerifying:
      if (is_message(ev, MessageKind::kLockConfirmed)) {
        f.state = EbsState::kEnroute;
        f.retransmit_at.reset();
        f.timeout_at.reset();
        out.actions.push_back(Action::kStartEnroute);
      } else if (is_message(ev, MessageKind::kBatteryRequest)) {
        emit(MessageKind::kVerification);  // our reply was lost
      } else if (ev.kind == EventKind::kRetransmitTimer) {
        if (next_retransmit(f.retransmit_at, f.attempts, now, t)) emit(MessageKind::kVerification);
      } else if (ev.kind == EventKind::kTimeout) {
        abort("verification-timeout");
      } else {
        handled = false;
      }
      break;

    case EbsState::kEnroute:
      if (ev.kind == EventKind::kNavArrived) {
        f.state = EbsState::kSearching;
        f.timeout_at = now + t.lock_timeout;
        out.actions.push_back(Action::kStartSearch);
      } else {
        handled = false;
      }
      break;

    case EbsState::kSearching:
      if (ev.kind == EventKind::kNavDetected) {
        f.state = EbsState::kAligning;
      } else if (ev.kind == EventKind::kTimeout) {
        abort("lock-timeout");
      } else {
        handled = false;
      }
      break;

    case EbsState::kAligning:
      if (ev.kind == EventKind::kNavLocked) {
        f.state = EbsState::kLocked;
      } else if (ev.kind == EventKind::kNavLost) {
        f.state = EbsState::kSearching;
      } else if (ev.kind == EventKind::kTimeout) {
        abort("lock-timeout");
      } else {
        handled = false;
      }
      break;

    case EbsState::kLocked:
      if (ev.kind == EventKind::kNavUnlocked) {
        f.state = EbsState::kAligning;
      } else if (ev.kind == EventKind::kNavLost) {
        f.state = EbsState::kSearching;
      } else if (ev.kind == EventKind::kInternalGo) {
        f.state = EbsState::kSlidesOpening;
        emit(MessageKind::kSlideSyncOpen);
        out.actions.push_back(Action::kOpenSlides);
        arm_retransmit(f.retransmit_at, f.attempts, now, t);
        f.timeout_at = now + t.slide_ack_timeout;
        if (f.mutant_release_without_ack) release();
      } else if (ev.kind == EventKind::kTimeout) {
        abort("lock-timeout");
      } else {
        handled = false;
      }
      break;

    case EbsState::kSlidesOpening:
      if (is_message(ev, MessageKind::kSlideAck)) {
        f.state = EbsState::kTransferring;
        f.slide_ack_received = true;
        f.retransmit_at.reset();
        f.timeout_at = now + t.release_window;
        if (!f.released) release();
      } else if (ev.kind == EventKind::kRetransmitTimer) {
        if (next_retransmit(f.retransmit_at, f.attempts, now, t)) emit(MessageKind::kSlideSyncOpen);
      } else if (ev.kind == EventKind::kTimeout) {
        abort("slide-ack-timeout");
      } else {
        handled = false;
      }
      break;

    case EbsState::kTransferring:
      if (ev.kind == EventKind::kReleaseDone) {
        emit(MessageKind::kBatteryReleased);
        arm_retransmit(f.retransmit_at, f.attempts, now, t);
        f.timeout_at = now + t.transfer_timeout;
      } else if (ev.kind == EventKind::kNoBattery) {
        abort("no-battery");
      } else if (is_message(ev, MessageKind::kTransferDone)) {
        f.state = EbsState::kClosing;
        f.retransmit_at.reset();
        f.timeout_at.reset();
        emit(MessageKind::kSlideSyncClose);
        out.actions.push_back(Action::kCloseSlides);
      } else if (ev.kind == EventKind::kRetransmitTimer) {
        if (next_retransmit(f.retransmit_at, f.attempts, now, t)) {
          emit(MessageKind::kBatteryReleased);
        }
      } else if (ev.kind == EventKind::kTimeout) {
        abort("transfer-timeout");
      } else {
        handled = false;
      }
      break;

    case EbsState::kClosing:
      if (ev.kind == EventKind::kSlidesClosed) {
        f.state = EbsState::kReturningHome;
        out.actions.push_back(Action::kReturnHome);
      } else {
        handled = false;
      }
      break;

    case EbsState::kReturningHome:
    case EbsState::kAborted:
      handled = false;
      break;
  }
  if (!handled) {
    out.fsm = fsm;
    out.ignored = true;
  }
  return out;
}

ReceiverStep receiver_fsm_step(const ReceiverFsm& fsm, const ProtocolEvent& ev, double now,
                               const ProtocolTimings& t) {
  ReceiverStep out{fsm, {}, {}, false};
  ReceiverFsm& f = out.fsm;
  auto emit = [&](MessageKind kind) {
    out.outgoing.push_back(make_message(kind, Party::kReceiver, f.next_seq, now));
  };
  auto emit_request = [&]() {
    emit(MessageKind::kBatteryRequest);
    out.outgoing.back().gps = f.gps;
    out.outgoing.back().altitude = f.altitude;
    out.outgoing.back().heading = f.heading;
  };
  auto to_aborted = [&]() {
    if (f.state == ReceiverState::kSlidesOpen || f.state == ReceiverState::kReceiving) {
      out.actions.push_back(Action::kCloseSlides);
    }
    f.state = ReceiverState::kAborted;
    f.retransmit_at.reset();
    f.timeout_at.reset();
    out.actions.push_back(Action::kResumeMission);
  };
  auto abort = [&](const char* reason) {
    to_aborted();
    emit(MessageKind::kAbort);
    out.outgoing.back().reason = reason;
  };
  auto received = [&]() {
    f.state = ReceiverState::kReceived;
    f.battery_arrived = true;
    f.retransmit_at.reset();
    f.timeout_at.reset();
    emit(MessageKind::kTransferDone);
    out.actions.push_back(Action::kCloseSlides);
  };

  if (is_message(ev, MessageKind::kAbort) && !is_terminal(f.state) &&
      f.state != ReceiverState::kMission) {
    to_aborted();
    return out;
  }

  bool handled = true;
  switch (f.state) {
    case ReceiverState::kMission:
      if (ev.kind == EventKind::kBatteryLow) {
        f.state = ReceiverState::kLowBattery;
        emit_request();
        arm_retransmit(f.retransmit_at, f.attempts, now, t);
        f.timeout_at = now + t.verification_timeout;
      } else {
        handled = false;
      }
      break;

    case ReceiverState::kLowBattery:
    case ReceiverState::kAwaitingVerification:
      if (is_message(ev, MessageKind::kVerification)) {
        f.state = ReceiverState::kPositionHold;
        f.verified = true;
        f.retransmit_at.reset();
        f.timeout_at = now + t.hold_timeout;
        emit(MessageKind::kLockConfirmed);
        out.actions.push_back(Action::kEngagePositionHold);
      } else if (ev.kind == EventKind::kRetransmitTimer) {
        f.state = ReceiverState::kAwaitingVerification;
        if (next_retransmit(f.retransmit_at, f.attempts, now, t)) emit_request();
      } else if (ev.kind == EventKind::kTimeout) {
        abort("no-verification");
      } else {
        handled = false;
      }
      break;

    case ReceiverState::kPositionHold:
      if (is_message(ev, MessageKind::kVerification)) {
        emit(MessageKind::kLockConfirmed);  // EBS did not hear us
      } else if (is_message(ev, MessageKind::kSlideSyncOpen)) {
        f.state = ReceiverState::kSlidesOpen;
        f.timeout_at = now + t.receive_timeout;
        emit(MessageKind::kSlideAck);
        out.actions.push_back(Action::kOpenSlides);
      } else if (ev.kind == EventKind::kTimeout) {
        abort("hold-timeout");
      } else {
        handled = false;
      }
      break;

    case ReceiverState::kSlidesOpen:
      if (is_message(ev, MessageKind::kSlideSyncOpen)) {
        emit(MessageKind::kSlideAck);
      } else if (is_message(ev, MessageKind::kBatteryReleased)) {
        f.state = ReceiverState::kReceiving;
        f.timeout_at = now + t.transfer_timeout;
      } else if (ev.kind == EventKind::kIrArrival) {
        received();
      } else if (ev.kind == EventKind::kTimeout) {
        abort("receive-timeout");
      } else {
        handled = false;
      }
      break;

    case ReceiverState::kReceiving:
      if (ev.kind == EventKind::kIrArrival) {
        received();
      } else if (ev.kind == EventKind::kTimeout) {
        abort("receive-timeout");
      } else {
        handled = false;
      }
      break;

    case ReceiverState::kReceived:
      if (is_message(ev, MessageKind::kBatteryReleased)) {
        emit(MessageKind::kTransferDone);  // EBS did not hear us
      } else if (!is_message(ev, MessageKind::kSlideSyncClose)) {
        handled = false;
      }
      break;

    case ReceiverState::kAborted:
      handled = false;
      break;
  }
  if (!handled) {
    out.fsm = fsm;
    out.ignored = true;
  }
  return out;
}

bool LinkModel::is_valid() const {
  return loss_probability >= 0.0 && loss_probability < 1.0 && base_latency >= 0.0 &&
         jitter >= 0.0 && jitter <= base_latency;
}

Link::Link(LinkModel model, std::uint64_t seed) : model_(model), rng_(seed) {
  if (!model_.is_valid()) throw Error(ErrorCode::kInvalidArgument, "invalid link model");
}

std::optional<double> Link::transmit(const ProtocolMessage& msg, double now) {
  ++sent_;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng_) < model_.loss_probability) {
    ++dropped_;
    return std::nullopt;
  }
  double at = now + model_.base_latency;
  if (model_.jitter > 0.0) {
    at += std::uniform_real_distribution<double>(-model_.jitter, model_.jitter)(rng_);
  }
  double& last = last_delivery_[msg.sender == Party::kEbs ? 0 : 1];
  at = std::max(at, last);
  last = at;
  queue_.push_back({at, order_++, msg});
  return at;
}

std::vector<ProtocolMessage> Link::poll(double now) {
  std::vector<Pending> due;
  auto split = std::stable_partition(queue_.begin(), queue_.end(),
                                     [&](const Pending& p) { return p.deliver_at > now; });
  due.assign(std::make_move_iterator(split), std::make_move_iterator(queue_.end()));
  queue_.erase(split, queue_.end());
  std::sort(due.begin(), due.end(), [](const Pending& a, const Pending& b) {
    return a.deliver_at != b.deliver_at ? a.deliver_at < b.deliver_at : a.order < b.order;
  });
  std::vector<ProtocolMessage> out;
  out.reserve(due.size());
  for (Pending& p : due) out.push_back(std::move(p.msg));
  return out;
}

std::array<bool, 3> BatteryCase::ir_readings() const {
  return {slots[0] == SlotState::kFull, slots[1] == SlotState::kFull,
          slots[2] == SlotState::kFull};
}

DispenseResult dispenser_step(const BatteryCase& battery_case, DispenserCommand command) {
  DispenseResult out{battery_case, std::nullopt};
  if (command == DispenserCommand::kNone) return out;
  const auto ir = battery_case.ir_readings();
  for (int i = 0; i < 3; ++i) {
    if (!ir[i]) continue;
    out.battery_case.slots[i] = SlotState::kEmpty;
    out.battery_case.servo_angle = deg2rad(60.0 * (i + 1));
    ++out.battery_case.dispensed;
    out.released_slot = i;
    return out;
  }
  throw Error(ErrorCode::kNoFullSlot, "battery case has no full slot");
}

}  // namespace aerobridge
