#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "avgcons/graph.hpp"
#include "avgcons/protocol.hpp"
#include "avgcons/sampling.hpp"

namespace avgcons {

struct TrialConfig {
  ProtocolKind protocol = ProtocolKind::R;
  ProtocolParams params;
  std::vector<double> inputs;
  DynamicSchedule schedule;
  /// Per-agent activation rounds; empty means every agent starts in round 1.
  /// Only rbard accepts staggered starts.
  std::vector<std::uint64_t> start_rounds;
  /// 0 selects default_horizon().
  std::uint64_t t_max = 0;
  /// Seed of the agents' random oracles. The schedule carries its own.
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;

  std::size_t size() const { return inputs.size(); }
  /// Last round in which some agent is passive (0 for synchronous starts).
  std::uint64_t s_max() const;
};

/// Throws std::invalid_argument on a size mismatch, an input outside [a, b],
/// a start round of 0, or staggered starts for a protocol other than rbard.
void validate(const TrialConfig& cfg);

/// Round by which the protocol is guaranteed to be stationary (decided, for
/// rbard) under the configured schedule, when one is known:
///   min, r: n-1 rounds for strongly connected graphs, T(n-1) with delay T,
///           2 for the blocking schedule (every two-round window is complete);
///   rbar:   ell*n for continuously strongly connected schedules, none
///           otherwise;
///   rbard:  s_max + 2n for continuously strongly connected schedules.
std::optional<std::uint64_t> time_bound(const TrialConfig& cfg);

/// Four times time_bound (or a conservative fallback when none is known).
std::uint64_t default_horizon(const TrialConfig& cfg);

/// Snapshot of one agent at the end of a round.
struct AgentSnapshot {
  std::optional<double> x;
  std::optional<double> d;
  std::optional<std::uint64_t> C;
};

struct MessageTally {
  std::uint64_t null = 0;
  std::uint64_t min = 0;
  std::uint64_t r = 0;
  std::uint64_t rbar = 0;
  std::uint64_t rbard = 0;
};

struct RoundRecord {
  std::uint64_t t = 0;
  std::vector<AgentSnapshot> agents;
  MessageTally messages;
};

struct TrialTrace {
  ProtocolKind protocol = ProtocolKind::R;
  ProtocolParams params;
  std::vector<double> inputs;
  std::vector<std::uint64_t> start_rounds;
  std::uint64_t s_max = 0;

  double theta = 0.0;  // average of the inputs
  double s = 0.0;      // sum of theta_u - a + 1

  std::vector<RoundRecord> rounds;  // rounds[t-1] is the end of round t

  /// Estimate every agent reaches once the vectors hold the global minima of
  /// the initial samples, computed from the initial states.
  std::optional<double> offline_estimate;
  /// At the horizon every agent's vectors equal those global minima.
  bool vectors_at_offline_minima = false;
  /// Last round in which each agent's vectors changed (0: never).
  std::vector<std::uint64_t> last_vector_change;
  /// Round of each agent's decision (rbard only).
  std::vector<std::optional<std::uint64_t>> decision_round;

  // Raw sample extremes and the quantized exponents drawn in the trial.
  std::optional<std::pair<double, double>> sample_range;
  std::optional<std::pair<std::int64_t, std::int64_t>> exponent_range;
  std::uint64_t distinct_exponents = 0;
  std::uint64_t counter_max = 0;

  std::uint64_t horizon() const { return rounds.size(); }
  std::size_t size() const { return inputs.size(); }
};

/// Executes rounds 1..t_max: every agent emits its message, v receives u's
/// message iff (u, v) is an edge of graph_at(t), every agent applies its
/// transition, and the end-of-round state is recorded.
TrialTrace run_trial(const TrialConfig& cfg);

/// Smallest t* with every x_u(t) in [theta - eps, theta + eps] for all
/// t >= t*; none when the last round is outside the band.
std::optional<std::uint64_t> convergence_time(const TrialTrace& trace, double epsilon);

/// Smallest t* from which all estimates are set, bit-identical across
/// agents and equal to their final value; none if they disagree at the end.
std::optional<std::uint64_t> stationary_round(const TrialTrace& trace);

struct DecisionReport {
  bool termination = false;
  bool irrevocability = false;
  bool validity = false;
  /// Latest first-decision round over all agents; none if someone never
  /// decided.
  std::optional<std::uint64_t> last_decision_round;
};

/// Termination, irrevocability and validity evaluated literally on the
/// recorded d_u(t).
DecisionReport check_decision_spec(const TrialTrace& trace, double epsilon);

/// Message-size accounting. A quantized entry costs the two's-complement
/// width of the trial's exponent range, a counter ceil(log2(C_max + 1)),
/// a real 64 bits, a null message 1 bit, an rbar cursor ceil(log2 ell).
struct MessageBitsReport {
  std::vector<std::uint64_t> per_round;
  std::uint64_t max_message = 0;
  unsigned exponent_width = 0;
  unsigned counter_width = 0;
  unsigned cursor_width = 0;
  std::uint64_t distinct_exponents = 0;
};

struct MessageCosts {
  std::uint64_t null = 1;
  std::uint64_t min = 64;
  std::uint64_t r = 0;
  std::uint64_t rbar = 0;
  std::uint64_t rbard = 0;
};

unsigned bit_width_for(std::uint64_t max_value);
MessageCosts message_costs(std::uint64_t ell,
                           std::optional<std::pair<std::int64_t, std::int64_t>> exponent_range,
                           std::uint64_t counter_max);
std::uint64_t tally_bits(const MessageTally& tally, const MessageCosts& costs);
MessageBitsReport message_bits(const TrialTrace& trace);

}  // namespace avgcons
