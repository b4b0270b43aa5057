#include <doctest.h>

#include <algorithm>

#include "aerobridge/checker.hpp"
#include "aerobridge/error.hpp"
#include "aerobridge/protocol.hpp"

using namespace aerobridge;

namespace {

const ProtocolTimings kTimings;

ProtocolMessage message(MessageKind kind, Party sender) {
  ProtocolMessage m;
  m.kind = kind;
  m.sender = sender;
  return m;
}

bool has(const std::vector<Action>& actions, Action a) {
  return std::find(actions.begin(), actions.end(), a) != actions.end();
}

}  // namespace

TEST_CASE("happy path through both machines") {
  ReceiverFsm rec;
  rec.heading = 0.4;
  rec.altitude = 10.0;
  ReceiverStep r = receiver_fsm_step(rec, ProtocolEvent::of(EventKind::kBatteryLow), 1.0, kTimings);
  CHECK(r.fsm.state == ReceiverState::kLowBattery);
  REQUIRE(r.outgoing.size() == 1);
  CHECK(r.outgoing[0].kind == MessageKind::kBatteryRequest);
  CHECK(r.outgoing[0].heading == 0.4);
  CHECK(r.fsm.timeout_at == doctest::Approx(1.0 + kTimings.verification_timeout));

  EbsStep e = ebs_fsm_step(EbsFsm{}, ProtocolEvent::of(r.outgoing[0]), 1.1, kTimings);
  CHECK(e.fsm.state == EbsState::kVerifying);
  CHECK(e.fsm.receiver_heading == 0.4);
  REQUIRE(e.outgoing.size() == 1);
  CHECK(e.outgoing[0].kind == MessageKind::kVerification);

  r = receiver_fsm_step(r.fsm, ProtocolEvent::of(e.outgoing[0]), 1.2, kTimings);
  CHECK(r.fsm.state == ReceiverState::kPositionHold);
  CHECK(has(r.actions, Action::kEngagePositionHold));
  REQUIRE(r.outgoing.size() == 1);
  CHECK(r.outgoing[0].kind == MessageKind::kLockConfirmed);

  e = ebs_fsm_step(e.fsm, ProtocolEvent::of(r.outgoing[0]), 1.3, kTimings);
  CHECK(e.fsm.state == EbsState::kEnroute);
  CHECK(has(e.actions, Action::kStartEnroute));
  e = ebs_fsm_step(e.fsm, ProtocolEvent::of(EventKind::kNavArrived), 20.0, kTimings);
  CHECK(e.fsm.state == EbsState::kSearching);
  e = ebs_fsm_step(e.fsm, ProtocolEvent::of(EventKind::kNavDetected), 21.0, kTimings);
  CHECK(e.fsm.state == EbsState::kAligning);
  e = ebs_fsm_step(e.fsm, ProtocolEvent::of(EventKind::kNavLocked), 25.0, kTimings);
  CHECK(e.fsm.state == EbsState::kLocked);
  e = ebs_fsm_step(e.fsm, ProtocolEvent::of(EventKind::kInternalGo), 26.0, kTimings);
  CHECK(e.fsm.state == EbsState::kSlidesOpening);
  CHECK(has(e.actions, Action::kOpenSlides));
  CHECK_FALSE(has(e.actions, Action::kRelease));
  REQUIRE(e.outgoing.size() == 1);
  CHECK(e.outgoing[0].kind == MessageKind::kSlideSyncOpen);

  r = receiver_fsm_step(r.fsm, ProtocolEvent::of(e.outgoing[0]), 26.1, kTimings);
  CHECK(r.fsm.state == ReceiverState::kSlidesOpen);
  REQUIRE(r.outgoing.size() == 1);
  CHECK(r.outgoing[0].kind == MessageKind::kSlideAck);

  e = ebs_fsm_step(e.fsm, ProtocolEvent::of(r.outgoing[0]), 26.2, kTimings);
  CHECK(e.fsm.state == EbsState::kTransferring);
  CHECK(has(e.actions, Action::kRelease));
  CHECK(e.fsm.releases == 1);
  e = ebs_fsm_step(e.fsm, ProtocolEvent::of(EventKind::kReleaseDone), 26.3, kTimings);
  REQUIRE(e.outgoing.size() == 1);
  CHECK(e.outgoing[0].kind == MessageKind::kBatteryReleased);

  r = receiver_fsm_step(r.fsm, ProtocolEvent::of(e.outgoing[0]), 26.4, kTimings);
  CHECK(r.fsm.state == ReceiverState::kReceiving);
  r = receiver_fsm_step(r.fsm, ProtocolEvent::of(EventKind::kIrArrival), 26.7, kTimings);
  CHECK(r.fsm.state == ReceiverState::kReceived);
  CHECK(has(r.actions, Action::kCloseSlides));
  REQUIRE(r.outgoing.size() == 1);
  CHECK(r.outgoing[0].kind == MessageKind::kTransferDone);

  e = ebs_fsm_step(e.fsm, ProtocolEvent::of(r.outgoing[0]), 26.8, kTimings);
  CHECK(e.fsm.state == EbsState::kClosing);
  e = ebs_fsm_step(e.fsm, ProtocolEvent::of(EventKind::kSlidesClosed), 28.3, kTimings);
  CHECK(e.fsm.state == EbsState::kReturningHome);
  CHECK(is_terminal(e.fsm.state));
  CHECK(is_terminal(r.fsm.state));
}

TEST_CASE("unexpected events are ignored") {
  const EbsFsm idle;
  const EbsStep e = ebs_fsm_step(idle, ProtocolEvent::of(EventKind::kInternalGo), 0.0, kTimings);
  CHECK(e.ignored);
  CHECK(e.fsm.state == EbsState::kIdle);
  CHECK(e.outgoing.empty());
  const ReceiverStep r = receiver_fsm_step(
      ReceiverFsm{}, ProtocolEvent::of(message(MessageKind::kSlideSyncOpen, Party::kEbs)), 0.0,
      kTimings);
  CHECK(r.ignored);
  CHECK(r.fsm.state == ReceiverState::kMission);
}

TEST_CASE("retransmission and timeouts") {
  ReceiverStep r =
      receiver_fsm_step(ReceiverFsm{}, ProtocolEvent::of(EventKind::kBatteryLow), 0.0, kTimings);
  REQUIRE(r.fsm.retransmit_at.has_value());
  CHECK(*r.fsm.retransmit_at == doctest::Approx(kTimings.retransmit_interval));
  int copies = 1;
  for (int i = 0; i < 10 && r.fsm.retransmit_at; ++i) {
    r = receiver_fsm_step(r.fsm, ProtocolEvent::of(EventKind::kRetransmitTimer),
                          *r.fsm.retransmit_at, kTimings);
    CHECK(r.fsm.state == ReceiverState::kAwaitingVerification);
    copies += static_cast<int>(r.outgoing.size());
  }
  CHECK(copies == kTimings.max_attempts);
  r = receiver_fsm_step(r.fsm, ProtocolEvent::of(EventKind::kTimeout), 3.0, kTimings);
  CHECK(r.fsm.state == ReceiverState::kAborted);
  REQUIRE(r.outgoing.size() == 1);
  CHECK(r.outgoing[0].kind == MessageKind::kAbort);
  CHECK(r.outgoing[0].reason == "no-verification");

  ProtocolTimings off = kTimings;
  off.retransmit = false;
  const ReceiverStep once =
      receiver_fsm_step(ReceiverFsm{}, ProtocolEvent::of(EventKind::kBatteryLow), 0.0, off);
  CHECK_FALSE(once.fsm.retransmit_at.has_value());
}

TEST_CASE("abort from the peer") {
  EbsFsm e;
  e.state = EbsState::kSlidesOpening;
  const EbsStep s =
      ebs_fsm_step(e, ProtocolEvent::of(message(MessageKind::kAbort, Party::kReceiver)), 1.0, kTimings);
  CHECK(s.fsm.state == EbsState::kAborted);
  CHECK(has(s.actions, Action::kCloseSlides));
  CHECK(s.outgoing.empty());
}

TEST_CASE("link") {
  SUBCASE("lossless link delivers after the base latency") {
    Link link({0.0, 0.02, 0.0}, 1);
    const auto at = link.transmit(message(MessageKind::kSlideAck, Party::kReceiver), 1.0);
    REQUIRE(at.has_value());
    CHECK(*at == doctest::Approx(1.02));
    CHECK(link.poll(1.01).empty());
    CHECK(link.poll(1.02).size() == 1);
    CHECK(link.in_flight() == 0);
    CHECK(link.dropped() == 0);
  }
  SUBCASE("per-sender FIFO under jitter") {
    Link link({0.0, 0.02, 0.02}, 9);
    for (std::uint32_t i = 0; i < 200; ++i) {
      ProtocolMessage m = message(MessageKind::kBatteryReleased, Party::kEbs);
      m.seq = i;
      link.transmit(m, 0.001 * i);
    }
    const auto out = link.poll(10.0);
    REQUIRE(out.size() == 200);
    for (std::uint32_t i = 0; i < 200; ++i) CHECK(out[i].seq == i);
  }
  SUBCASE("loss rate") {
    Link link({0.3, 0.02, 0.0}, 4);
    for (int i = 0; i < 10000; ++i) link.transmit(message(MessageKind::kAbort, Party::kEbs), 0.0);
    CHECK(link.sent() == 10000);
    CHECK(link.dropped() == doctest::Approx(3000).epsilon(0.05));
  }
  CHECK_THROWS_AS(Link({1.0, 0.02, 0.0}, 1), Error);
  CHECK_THROWS_AS(Link({0.0, 0.01, 0.02}, 1), Error);
}

TEST_CASE("dispenser") {
  BatteryCase c;
  CHECK(dispenser_step(c, DispenserCommand::kNone).released_slot == std::nullopt);
  for (int i = 0; i < 3; ++i) {
    const DispenseResult r = dispenser_step(c, DispenserCommand::kDispense);
    REQUIRE(r.released_slot.has_value());
    CHECK(*r.released_slot == i);
    CHECK(r.battery_case.dispensed == i + 1);
    CHECK_FALSE(r.battery_case.ir_readings()[i]);
    c = r.battery_case;
  }
  try {
    dispenser_step(c, DispenserCommand::kDispense);
    FAIL("dispensed from an empty case");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoFullSlot);
  }
}

TEST_CASE("exhaustive check of the nominal protocol") {
  for (int k : {0, 1, 2}) {
    CheckerConfig cfg;
    cfg.loss_budget = k;
    const CheckReport r = exhaustive_interleave_check(cfg);
    CAPTURE(k);
    CHECK(r.passed());
    CHECK(r.states > 0);
    CHECK(r.success_terminals > 0);
    CHECK(r.counterexamples.empty());
  }
  CheckerConfig none;
  none.loss_budget = 0;
  CHECK(exhaustive_interleave_check(none).aborted_terminals == 0);
}

TEST_CASE("lost verification without retransmission aborts cleanly") {
  CheckerConfig cfg;
  cfg.loss_budget = 1;
  cfg.timings.retransmit = false;
  cfg.droppable = {MessageKind::kVerification};
  const CheckReport r = exhaustive_interleave_check(cfg);
  CHECK(r.passed());
  CHECK(r.aborted_terminals > 0);
  CHECK(r.success_terminals > 0);
}

TEST_CASE("release without acknowledgement is caught") {
  CheckerConfig cfg;
  cfg.loss_budget = 1;
  cfg.mutant_release_without_ack = true;
  const CheckReport r = exhaustive_interleave_check(cfg);
  CHECK_FALSE(r.passed());
  CHECK(r.violations > 0);
  REQUIRE_FALSE(r.counterexamples.empty());
  CHECK_FALSE(r.counterexamples.front().trace.empty());
  CHECK_FALSE(r.counterexamples.front().property.empty());
}

TEST_CASE("frontier cap reports incompleteness") {
  CheckerConfig cfg;
  cfg.frontier_cap = 10;
  const CheckReport r = exhaustive_interleave_check(cfg);
  CHECK_FALSE(r.complete);
  CHECK(r.state_explosion);
  CHECK_FALSE(r.passed());
}

TEST_CASE("names") {
  CHECK(std::string(to_string(MessageKind::kSlideSyncOpen)) == "SlideSync(open)");
  CHECK(std::string(to_string(EbsState::kReturningHome)) == "ReturningHome");
  CHECK(std::string(to_string(ReceiverState::kAwaitingVerification)) == "AwaitingVerification");
  CHECK(std::string(to_string(EventKind::kIrArrival)) == "ir-arrival");
  CHECK(std::string(to_string(Action::kRelease)) == "release");
  CHECK(std::string(to_string(Party::kEbs)) == "ebs");
}
