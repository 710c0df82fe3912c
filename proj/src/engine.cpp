#include "avgcons/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace avgcons {

std::uint64_t TrialConfig::s_max() const {
  if (start_rounds.empty()) return 0;
  return *std::max_element(start_rounds.begin(), start_rounds.end()) - 1;
}

void validate(const TrialConfig& cfg) {
  const std::size_t n = cfg.inputs.size();
  if (n == 0) throw std::invalid_argument("trial needs at least one agent");
  if (cfg.schedule.size() != n)
    throw std::invalid_argument("schedule size differs from the number of inputs");
  for (double theta : cfg.inputs) check_input(theta, cfg.params);
  if (!cfg.start_rounds.empty()) {
    if (cfg.start_rounds.size() != n)
      throw std::invalid_argument("start_rounds size differs from the number of inputs");
    for (auto s : cfg.start_rounds)
      if (s < 1) throw std::invalid_argument("start rounds are numbered from 1");
    if (cfg.protocol != ProtocolKind::RbarD && cfg.s_max() > 0)
      throw std::invalid_argument("staggered starts are only defined for rbard");
  }
  if (cfg.params.ell == 0) throw std::invalid_argument("ell must be positive");
  if ((cfg.protocol == ProtocolKind::Rbar || cfg.protocol == ProtocolKind::RbarD) &&
      !cfg.params.beta)
    throw std::invalid_argument("quantized protocols need beta");
}

namespace {

bool continuously_strongly_connected(const DynamicSchedule& s) {
  switch (s.kind()) {
    case ScheduleKind::Csc:
    case ScheduleKind::CConnected:
      return true;
    case ScheduleKind::Fixed:
      return is_strongly_connected(s.fixed_graph());
    case ScheduleKind::Delayed:
      return s.params().at("T") == 1;
    case ScheduleKind::Blocking:
      return false;
  }
  return false;
}

}  // namespace

std::optional<std::uint64_t> time_bound(const TrialConfig& cfg) {
  const std::uint64_t n = cfg.size();
  const bool csc = continuously_strongly_connected(cfg.schedule);
  switch (cfg.protocol) {
    case ProtocolKind::Min:
    case ProtocolKind::R:
      // Round 1 is the first observable one, even when n = 1.
      if (csc) return std::max<std::uint64_t>(n - 1, 1);
      if (cfg.schedule.kind() == ScheduleKind::Delayed)
        return std::max<std::uint64_t>(
            static_cast<std::uint64_t>(cfg.schedule.params().at("T")) * (n - 1), 1);
      if (cfg.schedule.kind() == ScheduleKind::Blocking) return n > 1 ? 2 : 0;
      return std::nullopt;
    case ProtocolKind::Rbar:
      if (csc) return cfg.params.ell * n;
      return std::nullopt;
    case ProtocolKind::RbarD:
      if (csc) return cfg.s_max() + 2 * n;
      return std::nullopt;
  }
  return std::nullopt;
}

std::uint64_t default_horizon(const TrialConfig& cfg) {
  if (auto bound = time_bound(cfg)) return 4 * std::max<std::uint64_t>(*bound, 1);
  const std::uint64_t n = cfg.size();
  switch (cfg.protocol) {
    case ProtocolKind::Rbar: return 4 * cfg.params.ell * n;
    case ProtocolKind::RbarD: return 4 * (cfg.s_max() + 2 * n);
    default: return 4 * std::max<std::uint64_t>(n, 1);
  }
}

namespace {

void record_tally(MessageTally& tally, const Message& m) {
  std::visit(
      [&](const auto& msg) {
        using M = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<M, NullMessage>) ++tally.null;
        else if constexpr (std::is_same_v<M, MinMessage>) ++tally.min;
        else if constexpr (std::is_same_v<M, RMessage>) ++tally.r;
        else if constexpr (std::is_same_v<M, RbarMessage>) ++tally.rbar;
        else ++tally.rbard;
      },
      m);
}

template <class T>
std::vector<T> entrywise_min(const std::vector<const std::vector<T>*>& vs) {
  std::vector<T> out = *vs.front();
  for (const auto* v : vs)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], (*v)[i]);
  return out;
}

void note_samples(TrialTrace& trace, const Samples& samples) {
  for (const auto* v : {&samples.sigma, &samples.nu}) {
    for (double x : *v) {
      if (!trace.sample_range) trace.sample_range = std::make_pair(x, x);
      trace.sample_range->first = std::min(trace.sample_range->first, x);
      trace.sample_range->second = std::max(trace.sample_range->second, x);
    }
  }
}

template <class State>
void note_exponents(TrialTrace& trace, const std::vector<State>& states) {
  std::set<std::int64_t> seen;
  for (const auto& s : states) {
    for (const auto* v : {&s.X, &s.Y})
      for (const auto q : *v) seen.insert(q.k);
  }
  trace.distinct_exponents = seen.size();
  if (!seen.empty()) trace.exponent_range = std::make_pair(*seen.begin(), *seen.rbegin());
}

AgentSnapshot snapshot(const MinState& s) { return {estimate(s), std::nullopt, std::nullopt}; }
AgentSnapshot snapshot(const RState& s) { return {estimate(s), std::nullopt, std::nullopt}; }
AgentSnapshot snapshot(const RbarState& s) { return {estimate(s), std::nullopt, std::nullopt}; }
AgentSnapshot snapshot(const RbarDState& s) {
  return {std::nullopt, s.d, s.active ? std::optional<std::uint64_t>(s.C) : std::nullopt};
}

std::uint64_t revision_of(const MinState& s) {
  // Min has no vectors; its single value plays that role.
  return std::bit_cast<std::uint64_t>(s.x);
}
template <class State>
std::uint64_t revision_of(const State& s) {
  return s.revision;
}

/// Shared round loop. `step(state, inbox, t)` is the protocol transition and
/// `prepare(state, t)` runs before messages are emitted.
template <class State, class Step, class Prepare>
void run_rounds(const TrialConfig& cfg, std::vector<State>& states, TrialTrace& trace,
                Step step, Prepare prepare) {
  const std::size_t n = states.size();
  const std::uint64_t horizon = cfg.t_max == 0 ? default_horizon(cfg) : cfg.t_max;
  trace.rounds.reserve(horizon);
  trace.last_vector_change.assign(n, 0);
  std::vector<Message> out(n);
  std::vector<const Message*> inbox;
  inbox.reserve(n);
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const DirectedGraph g = cfg.schedule.graph_at(t);
    RoundRecord rec;
    rec.t = t;
    for (std::size_t u = 0; u < n; ++u) {
      states[u] = prepare(std::move(states[u]), t);
      out[u] = outbox(states[u]);
      record_tally(rec.messages, out[u]);
      if (const auto* m = std::get_if<RbarDMessage>(&out[u]))
        trace.counter_max = std::max(trace.counter_max, m->C);
    }
    rec.agents.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
      inbox.clear();
      for (std::size_t u = 0; u < n; ++u)
        if (g.has_edge(static_cast<NodeId>(u), static_cast<NodeId>(v))) inbox.push_back(&out[u]);
      const auto before = revision_of(states[v]);
      states[v] = step(std::move(states[v]), Inbox(inbox), t);
      if (revision_of(states[v]) != before) trace.last_vector_change[v] = t;
      rec.agents.push_back(snapshot(states[v]));
    }
    trace.rounds.push_back(std::move(rec));
  }
}

template <class State>
State identity_prepare(State s, std::uint64_t) {
  return s;
}

template <class State>
bool vectors_equal(const std::vector<State>& states, const auto& X, const auto& Y) {
  return std::all_of(states.begin(), states.end(),
                     [&](const State& s) { return s.X == X && s.Y == Y; });
}

}  // namespace

TrialTrace run_trial(const TrialConfig& cfg) {
  validate(cfg);
  const std::size_t n = cfg.size();
  const ProtocolParams& p = cfg.params;

  TrialTrace trace;
  trace.protocol = cfg.protocol;
  trace.params = p;
  trace.inputs = cfg.inputs;
  trace.start_rounds =
      cfg.start_rounds.empty() ? std::vector<std::uint64_t>(n, 1) : cfg.start_rounds;
  trace.s_max = cfg.s_max();
  trace.theta = std::accumulate(cfg.inputs.begin(), cfg.inputs.end(), 0.0) /
                static_cast<double>(n);
  trace.s = 0.0;
  for (double theta : cfg.inputs) trace.s += theta - p.a + 1.0;

  auto samples_for = [&](std::size_t u) {
    RngStream stream(cfg.seed, cfg.trial, u, Purpose::Samples);
    Samples s = draw_samples(cfg.inputs[u], p, stream);
    note_samples(trace, s);
    return s;
  };

  switch (cfg.protocol) {
    case ProtocolKind::Min: {
      std::vector<MinState> states;
      for (double theta : cfg.inputs) states.push_back(min_init(theta));
      const double lowest = *std::min_element(cfg.inputs.begin(), cfg.inputs.end());
      trace.offline_estimate = lowest;
      run_rounds(cfg, states, trace,
                 [&](MinState s, Inbox in, std::uint64_t) { return apply(s, in, p); },
                 identity_prepare<MinState>);
      trace.vectors_at_offline_minima = std::all_of(
          states.begin(), states.end(), [&](const MinState& s) { return s.x == lowest; });
      break;
    }
    case ProtocolKind::R: {
      std::vector<RState> states;
      for (std::size_t u = 0; u < n; ++u) states.push_back(r_init_from_samples(samples_for(u), p));
      std::vector<const std::vector<double>*> xs, ys;
      for (const auto& s : states) {
        xs.push_back(&s.X);
        ys.push_back(&s.Y);
      }
      const auto X = entrywise_min(xs);
      const auto Y = entrywise_min(ys);
      trace.offline_estimate = ratio_estimate(p.a, Y, X);
      run_rounds(cfg, states, trace,
                 [&](RState s, Inbox in, std::uint64_t) { return apply(std::move(s), in, p); },
                 identity_prepare<RState>);
      trace.vectors_at_offline_minima = vectors_equal(states, X, Y);
      break;
    }
    case ProtocolKind::Rbar: {
      std::vector<RbarState> states;
      for (std::size_t u = 0; u < n; ++u) states.push_back(rbar_init_from_samples(samples_for(u), p));
      note_exponents(trace, states);
      std::vector<const std::vector<QuantExponent>*> xs, ys;
      for (const auto& s : states) {
        xs.push_back(&s.X);
        ys.push_back(&s.Y);
      }
      const auto X = entrywise_min(xs);
      const auto Y = entrywise_min(ys);
      trace.offline_estimate = ratio_estimate(p.a, Y, X, *p.beta);
      run_rounds(cfg, states, trace,
                 [&](RbarState s, Inbox in, std::uint64_t) { return apply(std::move(s), in, p); },
                 identity_prepare<RbarState>);
      trace.vectors_at_offline_minima = vectors_equal(states, X, Y);
      break;
    }
    case ProtocolKind::RbarD: {
      std::vector<RbarDState> states;
      for (std::size_t u = 0; u < n; ++u)
        states.push_back(rbard_init_from_samples(samples_for(u), p, trace.start_rounds[u]));
      note_exponents(trace, states);
      std::vector<const std::vector<QuantExponent>*> xs, ys;
      for (const auto& s : states) {
        xs.push_back(&s.X);
        ys.push_back(&s.Y);
      }
      const auto X = entrywise_min(xs);
      const auto Y = entrywise_min(ys);
      trace.offline_estimate = ratio_estimate(p.a, Y, X, *p.beta);
      run_rounds(
          cfg, states, trace,
          [&](RbarDState s, Inbox in, std::uint64_t t) { return apply(std::move(s), in, p, t); },
          [](RbarDState s, std::uint64_t t) { return wake(std::move(s), t); });
      trace.vectors_at_offline_minima = vectors_equal(states, X, Y);
      for (const auto& s : states) trace.decision_round.push_back(s.decided_at);
      break;
    }
  }
  return trace;
}

std::optional<std::uint64_t> convergence_time(const TrialTrace& trace, double epsilon) {
  const double lo = trace.theta - epsilon;
  const double hi = trace.theta + epsilon;
  auto inside = [&](const RoundRecord& r) {
    return std::all_of(r.agents.begin(), r.agents.end(), [&](const AgentSnapshot& a) {
      return a.x && *a.x >= lo && *a.x <= hi;
    });
  };
  std::optional<std::uint64_t> t_star;
  for (auto it = trace.rounds.rbegin(); it != trace.rounds.rend(); ++it) {
    if (!inside(*it)) break;
    t_star = it->t;
  }
  return t_star;
}

std::optional<std::uint64_t> stationary_round(const TrialTrace& trace) {
  if (trace.rounds.empty()) return std::nullopt;
  const auto& last = trace.rounds.back().agents;
  if (last.empty() || !last.front().x) return std::nullopt;
  const auto target = std::bit_cast<std::uint64_t>(*last.front().x);
  auto agreed = [&](const RoundRecord& r) {
    return std::all_of(r.agents.begin(), r.agents.end(), [&](const AgentSnapshot& a) {
      return a.x && std::bit_cast<std::uint64_t>(*a.x) == target;
    });
  };
  std::optional<std::uint64_t> t_star;
  for (auto it = trace.rounds.rbegin(); it != trace.rounds.rend(); ++it) {
    if (!agreed(*it)) break;
    t_star = it->t;
  }
  return t_star;
}

DecisionReport check_decision_spec(const TrialTrace& trace, double epsilon) {
  DecisionReport rep;
  rep.termination = !trace.rounds.empty();
  rep.irrevocability = true;
  rep.validity = true;
  const std::size_t n = trace.size();
  const double lo = trace.theta - epsilon;
  const double hi = trace.theta + epsilon;
  std::uint64_t last_first = 0;
  for (std::size_t u = 0; u < n; ++u) {
    std::optional<double> first;
    std::optional<std::uint64_t> first_round;
    // Termination: from some round on, d_u stays set.
    std::optional<std::uint64_t> settled;
    for (const auto& r : trace.rounds) {
      const auto& d = r.agents[u].d;
      if (d) {
        if (!first) {
          first = d;
          first_round = r.t;
        } else if (std::bit_cast<std::uint64_t>(*d) != std::bit_cast<std::uint64_t>(*first)) {
          rep.irrevocability = false;
        }
        if (!(*d >= lo && *d <= hi)) rep.validity = false;
        if (!settled) settled = r.t;
      } else {
        if (first) rep.irrevocability = false;  // reset to unset
        settled.reset();
      }
    }
    if (!settled) rep.termination = false;
    if (first_round) last_first = std::max(last_first, *first_round);
  }
  if (rep.termination) rep.last_decision_round = last_first;
  return rep;
}

unsigned bit_width_for(std::uint64_t max_value) {
  return static_cast<unsigned>(std::bit_width(max_value));
}

MessageCosts message_costs(std::uint64_t ell,
                           std::optional<std::pair<std::int64_t, std::int64_t>> exponent_range,
                           std::uint64_t counter_max) {
  MessageCosts c;
  const std::uint64_t w =
      exponent_range ? twos_complement_width(exponent_range->first, exponent_range->second) : 0;
  c.r = 2 * ell * 64;
  c.rbar = 2 * w + bit_width_for(ell == 0 ? 0 : ell - 1);
  c.rbard = 2 * ell * w + bit_width_for(counter_max);
  return c;
}

std::uint64_t tally_bits(const MessageTally& tally, const MessageCosts& costs) {
  return tally.null * costs.null + tally.min * costs.min + tally.r * costs.r +
         tally.rbar * costs.rbar + tally.rbard * costs.rbard;
}

MessageBitsReport message_bits(const TrialTrace& trace) {
  MessageBitsReport rep;
  const auto costs =
      message_costs(trace.params.ell, trace.exponent_range, trace.counter_max);
  rep.exponent_width = trace.exponent_range ? twos_complement_width(trace.exponent_range->first,
                                                                    trace.exponent_range->second)
                                            : 0;
  rep.counter_width = bit_width_for(trace.counter_max);
  rep.cursor_width = bit_width_for(trace.params.ell == 0 ? 0 : trace.params.ell - 1);
  rep.distinct_exponents = trace.distinct_exponents;
  rep.per_round.reserve(trace.rounds.size());
  for (const auto& r : trace.rounds) {
    rep.per_round.push_back(tally_bits(r.messages, costs));
    const auto& m = r.messages;
    if (m.null) rep.max_message = std::max(rep.max_message, costs.null);
    if (m.min) rep.max_message = std::max(rep.max_message, costs.min);
    if (m.r) rep.max_message = std::max(rep.max_message, costs.r);
    if (m.rbar) rep.max_message = std::max(rep.max_message, costs.rbar);
    if (m.rbard) rep.max_message = std::max(rep.max_message, costs.rbard);
  }
  return rep;
}

}  // namespace avgcons
