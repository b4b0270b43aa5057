#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aerobridge/protocol.hpp"

namespace aerobridge {

struct CheckerConfig {
  int loss_budget = 2;             // K, at most 3
  int max_depth = 200;             // events per run
  std::size_t frontier_cap = 2000000;
  ProtocolTimings timings;
  bool mutant_release_without_ack = false;
  // When non-empty only these message kinds may be dropped.
  std::vector<MessageKind> droppable;
};

struct Counterexample {
  std::string property;  // S1, S2, S3, deadlock, depth-bound
  std::vector<std::string> trace;
};

struct CheckReport {
  bool complete = false;         // false when the frontier cap was hit
  bool state_explosion = false;
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t terminal_states = 0;
  std::size_t success_terminals = 0;  // EBS ReturningHome and receiver Received
  std::size_t aborted_terminals = 0;
  std::size_t violations = 0;
  int max_depth_seen = 0;
  std::vector<Counterexample> counterexamples;  // shortest first, capped

  bool safe() const { return violations == 0; }
  bool passed() const { return complete && violations == 0; }
};

/// Breadth-first exploration of every interleaving of message delivery,
/// message loss (up to the budget), environment events and timers between the
/// two protocol machines. Channels are per-direction FIFO queues; timers fire
/// only when no delivery or environment event is enabled.
CheckReport exhaustive_interleave_check(const CheckerConfig& config);

}  // namespace aerobridge
