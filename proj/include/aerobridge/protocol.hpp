#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aerobridge/geometry.hpp"

namespace aerobridge {

enum class Party { kEbs, kReceiver };

enum class MessageKind {
  kBatteryRequest,
  kVerification,
  kLockConfirmed,
  kSlideSyncOpen,
  kSlideSyncClose,
  kSlideAck,
  kBatteryReleased,
  kTransferDone,
  kAbort,
};

const char* to_string(Party p);
const char* to_string(MessageKind k);

struct ProtocolMessage {
  MessageKind kind = MessageKind::kBatteryRequest;
  Party sender = Party::kReceiver;
  std::uint32_t seq = 0;
  double send_time = 0.0;
  // BatteryRequest payload.
  GpsCoordinate gps;
  double altitude = 0.0;
  double heading = 0.0;  // receiver yaw, rad
  std::string reason;    // Abort payload
};

enum class EbsState {
  kIdle,
  kVerifying,
  kEnroute,
  kSearching,
  kAligning,
  kLocked,
  kSlidesOpening,
  kTransferring,
  kClosing,
  kReturningHome,
  kAborted,
};

enum class ReceiverState {
  kMission,
  kLowBattery,
  kAwaitingVerification,
  kPositionHold,
  kSlidesOpen,
  kReceiving,
  kReceived,
  kAborted,
};

const char* to_string(EbsState s);
const char* to_string(ReceiverState s);

enum class EventKind {
  kMessage,
  kRetransmitTimer,
  kTimeout,
  kBatteryLow,
  kNavArrived,     // EBS reached the end of its approach trajectory
  kNavDetected,    // center marker acquired
  kNavLocked,
  kNavUnlocked,    // LOCK -> ALIGN
  kNavLost,
  kInternalGo,     // EBS decides to start the transfer
  kReleaseDone,    // servo dropped the battery
  kNoBattery,      // dispenser found no full slot
  kIrArrival,      // receiver IR sensor saw the battery
  kSlidesClosed,
};

const char* to_string(EventKind k);

struct ProtocolEvent {
  EventKind kind = EventKind::kMessage;
  ProtocolMessage message;  // valid for kMessage

  static ProtocolEvent of(EventKind kind) { return {kind, {}}; }
  static ProtocolEvent of(const ProtocolMessage& m) { return {EventKind::kMessage, m}; }
};

enum class Action {
  kStartEnroute,
  kStartSearch,
  kOpenSlides,
  kRelease,
  kCloseSlides,
  kReturnHome,
  kEngagePositionHold,
  kResumeMission,
  kAbortHandoff,
};

const char* to_string(Action a);

struct ProtocolTimings {
  double retransmit_interval = 0.5;  // s
  int max_attempts = 5;              // transmissions per message, first included
  bool retransmit = true;
  double verification_timeout = 3.0;
  double lock_timeout = 120.0;
  double slide_ack_timeout = 2.0;
  double release_window = 2.0;       // SlideAck -> servo release
  double transfer_timeout = 3.0;     // release -> TransferDone
  double hold_timeout = 150.0;       // receiver PositionHold without SlideSync(open)
  double receive_timeout = 6.0;      // receiver SlidesOpen without the battery
  double low_battery_threshold = 25.0;  // percent

  bool is_valid() const;
};

struct EbsFsm {
  EbsState state = EbsState::kIdle;
  std::uint32_t next_seq = 1;
  int attempts = 0;
  std::optional<double> retransmit_at;
  std::optional<double> timeout_at;
  bool slide_ack_received = false;
  bool released = false;
  int releases = 0;
  // Receiver data from the BatteryRequest.
  GpsCoordinate receiver_gps;
  double receiver_altitude = 0.0;
  double receiver_heading = 0.0;
  // Test hook: release as soon as the slides start opening.
  bool mutant_release_without_ack = false;
};

struct ReceiverFsm {
  ReceiverState state = ReceiverState::kMission;
  std::uint32_t next_seq = 1;
  int attempts = 0;
  std::optional<double> retransmit_at;
  std::optional<double> timeout_at;
  bool verified = false;
  bool battery_arrived = false;
  // Payload for BatteryRequest.
  GpsCoordinate gps;
  double altitude = 0.0;
  double heading = 0.0;
};

struct EbsStep {
  EbsFsm fsm;
  std::vector<ProtocolMessage> outgoing;
  std::vector<Action> actions;
  bool ignored = false;
};

struct ReceiverStep {
  ReceiverFsm fsm;
  std::vector<ProtocolMessage> outgoing;
  std::vector<Action> actions;
  bool ignored = false;
};

/// Pure transition functions. Unexpected events leave the machine unchanged
/// and set `ignored`.
EbsStep ebs_fsm_step(const EbsFsm& fsm, const ProtocolEvent& event, double now,
                     const ProtocolTimings& timings);
ReceiverStep receiver_fsm_step(const ReceiverFsm& fsm, const ProtocolEvent& event, double now,
                               const ProtocolTimings& timings);

bool is_terminal(EbsState s);
bool is_terminal(ReceiverState s);

struct LinkModel {
  double loss_probability = 0.05;
  double base_latency = 0.020;  // s
  double jitter = 0.010;        // s, uniform in [-jitter, +jitter]

  bool is_valid() const;
};

/// Lossy, latent radio link with per-sender FIFO delivery.
class Link {
 public:
  Link(LinkModel model, std::uint64_t seed);

  /// Returns the delivery time, or nothing when the message is dropped.
  std::optional<double> transmit(const ProtocolMessage& msg, double now);

  /// Removes and returns every message due at `now`, in delivery order.
  std::vector<ProtocolMessage> poll(double now);

  std::size_t in_flight() const { return queue_.size(); }
  std::uint64_t dropped() const { return dropped_; }
  std::uint64_t sent() const { return sent_; }

 private:
  struct Pending {
    double deliver_at;
    std::uint64_t order;
    ProtocolMessage msg;
  };

  LinkModel model_;
  std::mt19937_64 rng_;
  std::array<double, 2> last_delivery_{-1e300, -1e300};
  std::vector<Pending> queue_;
  std::uint64_t order_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t sent_ = 0;
};

enum class SlotState { kFull, kEmpty, kDispensing };

struct BatteryCase {
  std::array<SlotState, 3> slots{SlotState::kFull, SlotState::kFull, SlotState::kFull};
  double servo_angle = 0.0;  // rad
  int dispensed = 0;

  /// IR slot readings: true where a battery is present.
  std::array<bool, 3> ir_readings() const;
};

enum class DispenserCommand { kNone, kDispense };

struct DispenseResult {
  BatteryCase battery_case;
  std::optional<int> released_slot;
};

/// Throws NoFullSlot when a dispense finds every slot empty.
DispenseResult dispenser_step(const BatteryCase& battery_case, DispenserCommand command);

}  // namespace aerobridge
