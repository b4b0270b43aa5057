#include "aerobridge/checker.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <optional>
#include <unordered_set>

#include "aerobridge/error.hpp"

namespace aerobridge {
namespace {

constexpr std::size_t kMaxCounterexamples = 4;

struct World {
  EbsFsm ebs;
  ReceiverFsm rec;
  double now = 0.0;
  std::deque<ProtocolMessage> to_rec;
  std::deque<ProtocolMessage> to_ebs;
  int losses = 0;
  bool battery_low_fired = false;
  bool release_pending = false;    // servo still has to report
  bool battery_in_transit = false;
  int releases = 0;
};

struct Node {
  World world;
  std::size_t parent;
  std::string label;
  int depth;
};

void append_opt(std::string& s, const std::optional<double>& v) {
  char buf[40];
  if (v) {
    std::snprintf(buf, sizeof buf, "%.17g,", *v);
    s += buf;
  } else {
    s += "-,";
  }
}

// Everything that influences future behaviour; sequence numbers and send
// times do not.
std::string key_of(const World& w) {
  std::string k;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%d|", static_cast<int>(w.ebs.state),
                w.ebs.attempts, w.ebs.slide_ack_received, w.ebs.released, w.ebs.releases,
                static_cast<int>(w.rec.state));
  k += buf;
  append_opt(k, w.ebs.retransmit_at);
  append_opt(k, w.ebs.timeout_at);
  std::snprintf(buf, sizeof buf, "%d,%d,%d|", w.rec.attempts, w.rec.verified,
                w.rec.battery_arrived);
  k += buf;
  append_opt(k, w.rec.retransmit_at);
  append_opt(k, w.rec.timeout_at);
  std::snprintf(buf, sizeof buf, "%.17g|%d,%d,%d,%d,%d|", w.now, w.losses, w.battery_low_fired,
                w.release_pending, w.battery_in_transit, w.releases);
  k += buf;
  for (const auto& m : w.to_rec) k += static_cast<char>('a' + static_cast<int>(m.kind));
  k += '|';
  for (const auto& m : w.to_ebs) k += static_cast<char>('a' + static_cast<int>(m.kind));
  return k;
}

class Explorer {
 public:
  explicit Explorer(const CheckerConfig& cfg) : cfg_(cfg) {}

  CheckReport run() {
    World init;
    init.ebs.mutant_release_without_ack = cfg_.mutant_release_without_ack;
    nodes_.push_back({init, kNone, "start", 0});
    visited_.insert(key_of(init));
    std::deque<std::size_t> frontier{0};
    report_.states = 1;

    while (!frontier.empty()) {
      if (frontier.size() > cfg_.frontier_cap) {
        report_.state_explosion = true;
        return report_;
      }
      const std::size_t id = frontier.front();
      frontier.pop_front();
      const int depth = nodes_[id].depth;
      report_.max_depth_seen = std::max(report_.max_depth_seen, depth);

      std::vector<std::pair<World, std::string>> next = successors(id);
      if (next.empty()) {
        classify_terminal(id);
        continue;
      }
      if (depth >= cfg_.max_depth) {
        violation(id, "depth-bound", "");
        continue;
      }
      for (auto& [w, label] : next) {
        ++report_.transitions;
        if (!visited_.insert(key_of(w)).second) continue;
        nodes_.push_back({std::move(w), id, std::move(label), depth + 1});
        ++report_.states;
        frontier.push_back(nodes_.size() - 1);
      }
    }
    report_.complete = true;
    return report_;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool droppable(MessageKind k) const {
    return cfg_.droppable.empty() ||
           std::find(cfg_.droppable.begin(), cfg_.droppable.end(), k) != cfg_.droppable.end();
  }

  // Applies a receiver transition and its side effects. Returns a safety
  // property name when one is broken.
  const char* apply_receiver(World& w, const ProtocolEvent& ev) {
    const ReceiverState before = w.rec.state;
    ReceiverStep s = receiver_fsm_step(w.rec, ev, w.now, cfg_.timings);
    w.rec = s.fsm;
    for (auto& m : s.outgoing) w.to_ebs.push_back(std::move(m));
    if (w.rec.state == ReceiverState::kSlidesOpen && before != ReceiverState::kSlidesOpen &&
        !(before == ReceiverState::kPositionHold && w.rec.verified)) {
      return "S2";
    }
    return nullptr;
  }

  const char* apply_ebs(World& w, const ProtocolEvent& ev) {
    EbsStep s = ebs_fsm_step(w.ebs, ev, w.now, cfg_.timings);
    w.ebs = s.fsm;
    for (auto& m : s.outgoing) w.to_rec.push_back(std::move(m));
    const char* broken = nullptr;
    for (Action a : s.actions) {
      if (a != Action::kRelease) continue;
      ++w.releases;
      w.release_pending = true;
      w.battery_in_transit = true;
      if (!(w.ebs.state == EbsState::kTransferring && w.ebs.slide_ack_received)) broken = "S1";
      if (w.releases > 1) broken = "S3";
    }
    return broken;
  }

  std::vector<std::pair<World, std::string>> successors(std::size_t id) {
    std::vector<std::pair<World, std::string>> out;
    const World& w = nodes_[id].world;

    auto push = [&](World next, std::string label, const char* broken) {
      if (broken != nullptr) {
        nodes_.push_back({next, id, label, nodes_[id].depth + 1});
        violation(nodes_.size() - 1, broken, "");
        return;
      }
      out.emplace_back(std::move(next), std::move(label));
    };

    if (!w.to_rec.empty()) {
      World n = w;
      const ProtocolMessage m = n.to_rec.front();
      n.to_rec.pop_front();
      const char* broken = apply_receiver(n, ProtocolEvent::of(m));
      push(std::move(n), std::string("deliver ") + to_string(m.kind) + " -> receiver", broken);
      if (w.losses < cfg_.loss_budget && droppable(m.kind)) {
        World d = w;
        d.to_rec.pop_front();
        ++d.losses;
        push(std::move(d), std::string("drop ") + to_string(m.kind) + " -> receiver", nullptr);
      }
    }
    if (!w.to_ebs.empty()) {
      World n = w;
      const ProtocolMessage m = n.to_ebs.front();
      n.to_ebs.pop_front();
      const char* broken = apply_ebs(n, ProtocolEvent::of(m));
      push(std::move(n), std::string("deliver ") + to_string(m.kind) + " -> ebs", broken);
      if (w.losses < cfg_.loss_budget && droppable(m.kind)) {
        World d = w;
        d.to_ebs.pop_front();
        ++d.losses;
        push(std::move(d), std::string("drop ") + to_string(m.kind) + " -> ebs", nullptr);
      }
    }

    // Environment.
    auto env_ebs = [&](EventKind k) {
      World n = w;
      const char* broken = apply_ebs(n, ProtocolEvent::of(k));
      push(std::move(n), std::string("env ") + to_string(k), broken);
    };
    if (w.rec.state == ReceiverState::kMission && !w.battery_low_fired) {
      World n = w;
      n.battery_low_fired = true;
      const char* broken = apply_receiver(n, ProtocolEvent::of(EventKind::kBatteryLow));
      push(std::move(n), "env battery-low", broken);
    }
    switch (w.ebs.state) {
      case EbsState::kEnroute: env_ebs(EventKind::kNavArrived); break;
      case EbsState::kSearching: env_ebs(EventKind::kNavDetected); break;
      case EbsState::kAligning: env_ebs(EventKind::kNavLocked); break;
      case EbsState::kLocked: env_ebs(EventKind::kInternalGo); break;
      case EbsState::kClosing: env_ebs(EventKind::kSlidesClosed); break;
      default: break;
    }
    if (w.release_pending) {
      World n = w;
      n.release_pending = false;
      const char* broken = apply_ebs(n, ProtocolEvent::of(EventKind::kReleaseDone));
      push(std::move(n), "env release-done", broken);
    }
    if (w.battery_in_transit && !w.release_pending) {
      World n = w;
      n.battery_in_transit = false;
      const char* broken = apply_receiver(n, ProtocolEvent::of(EventKind::kIrArrival));
      push(std::move(n), "env ir-arrival", broken);
    }
    if (!out.empty()) return out;

    // Quiescent: the earliest timer fires.
    struct Timer {
      std::optional<double> at;
      bool ebs;
      EventKind kind;
    };
    const Timer timers[] = {{w.ebs.retransmit_at, true, EventKind::kRetransmitTimer},
                            {w.ebs.timeout_at, true, EventKind::kTimeout},
                            {w.rec.retransmit_at, false, EventKind::kRetransmitTimer},
                            {w.rec.timeout_at, false, EventKind::kTimeout}};
    const Timer* first = nullptr;
    for (const Timer& t : timers) {
      if (t.at && (first == nullptr || *t.at < *first->at)) first = &t;
    }
    if (first == nullptr) return out;
    World n = w;
    n.now = std::max(n.now, *first->at);
    const char* broken = first->ebs ? apply_ebs(n, ProtocolEvent::of(first->kind))
                                    : apply_receiver(n, ProtocolEvent::of(first->kind));
    char label[96];
    std::snprintf(label, sizeof label, "timer %s %s @ %.3f s", first->ebs ? "ebs" : "receiver",
                  to_string(first->kind), n.now);
    // A timer that the machine ignores must not keep firing.
    if (first->ebs && n.ebs.retransmit_at == w.ebs.retransmit_at &&
        n.ebs.timeout_at == w.ebs.timeout_at && n.ebs.state == w.ebs.state) {
      (first->kind == EventKind::kTimeout ? n.ebs.timeout_at : n.ebs.retransmit_at).reset();
    }
    if (!first->ebs && n.rec.retransmit_at == w.rec.retransmit_at &&
        n.rec.timeout_at == w.rec.timeout_at && n.rec.state == w.rec.state) {
      (first->kind == EventKind::kTimeout ? n.rec.timeout_at : n.rec.retransmit_at).reset();
    }
    push(std::move(n), label, broken);
    return out;
  }

  void classify_terminal(std::size_t id) {
    const World& w = nodes_[id].world;
    ++report_.terminal_states;
    const bool ebs_done = is_terminal(w.ebs.state) || w.ebs.state == EbsState::kIdle;
    const bool rec_done = is_terminal(w.rec.state);
    if (!ebs_done || !rec_done) {
      violation(id, "deadlock", "");
      return;
    }
    if (w.ebs.state == EbsState::kReturningHome && w.rec.state == ReceiverState::kReceived) {
      ++report_.success_terminals;
    } else {
      ++report_.aborted_terminals;
    }
  }

  void violation(std::size_t id, const char* property, const char*) {
    ++report_.violations;
    if (report_.counterexamples.size() >= kMaxCounterexamples) return;
    Counterexample ce;
    ce.property = property;
    for (std::size_t cur = id; cur != kNone; cur = nodes_[cur].parent) {
      const World& w = nodes_[cur].world;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s  [ebs=%s receiver=%s t=%.3f]", nodes_[cur].label.c_str(),
                    to_string(w.ebs.state), to_string(w.rec.state), w.now);
      ce.trace.emplace_back(buf);
    }
    std::reverse(ce.trace.begin(), ce.trace.end());
    report_.counterexamples.push_back(std::move(ce));
  }

  const CheckerConfig& cfg_;
  std::vector<Node> nodes_;
  std::unordered_set<std::string> visited_;
  CheckReport report_;
};

}  // namespace

CheckReport exhaustive_interleave_check(const CheckerConfig& config) {
  if (config.loss_budget < 0 || config.loss_budget > 3) {
    throw Error(ErrorCode::kInvalidArgument, "loss budget must be in [0, 3]");
  }
  if (config.max_depth <= 0 || config.frontier_cap == 0 || !config.timings.is_valid()) {
    throw Error(ErrorCode::kInvalidArgument, "invalid checker configuration");
  }
  return Explorer(config).run();
}

}  // namespace aerobridge
