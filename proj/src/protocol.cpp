#include "avgcons/protocol.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <stdexcept>

namespace avgcons {

namespace {

void require_nonempty(Inbox inbox) {
  // The self-loop always delivers the agent's own message.
  if (inbox.empty()) throw std::logic_error("empty inbox: every agent must hear itself");
}

template <class M>
const M& expect(const Message* m) {
  const auto* typed = std::get_if<M>(m);
  if (typed == nullptr) throw std::invalid_argument("unexpected message variant in inbox");
  return *typed;
}

template <class T>
bool fold_min(std::vector<T>& into, const std::vector<T>& from) {
  if (from.size() != into.size()) throw std::invalid_argument("vector length mismatch in inbox");
  bool changed = false;
  for (std::size_t i = 0; i < into.size(); ++i) {
    if (from[i] < into[i]) {
      into[i] = from[i];
      changed = true;
    }
  }
  return changed;
}

double beta_of(const ProtocolParams& p) {
  if (!p.beta) throw std::invalid_argument("quantized protocol requires beta");
  return *p.beta;
}

double dequantized_sum(std::span<const QuantExponent> v, double beta) {
  double sum = 0.0;
  for (const auto q : v) sum += dequantize(q, beta);
  return sum;
}

}  // namespace

void check_input(double theta, const ProtocolParams& p) {
  if (!(theta >= p.a && theta <= p.b))
    throw std::invalid_argument("input value outside [a, b]");
}

double ratio_estimate(double a, std::span<const double> Y, std::span<const double> X) {
  double sy = 0.0;
  double sx = 0.0;
  for (double y : Y) sy += y;
  for (double x : X) sx += x;
  assert(sx > 0.0);
  return a - 1.0 + sy / sx;
}

double ratio_estimate(double a, std::span<const QuantExponent> Y,
                      std::span<const QuantExponent> X, double beta) {
  const double sy = dequantized_sum(Y, beta);
  const double sx = dequantized_sum(X, beta);
  assert(sx > 0.0);
  return a - 1.0 + sy / sx;
}

// Min

MinState min_init(double theta) { return MinState{theta}; }

Message outbox(const MinState& s) { return MinMessage{s.x}; }

MinState apply(MinState s, Inbox inbox, const ProtocolParams&) {
  require_nonempty(inbox);
  for (const Message* m : inbox) s.x = std::min(s.x, expect<MinMessage>(m).x);
  return s;
}

std::optional<double> estimate(const MinState& s) { return s.x; }

// R

RState r_init_from_samples(Samples samples, const ProtocolParams& p) {
  if (samples.sigma.size() != p.ell || samples.nu.size() != p.ell)
    throw std::invalid_argument("sample vectors must have length ell");
  RState s;
  s.X = std::move(samples.sigma);
  s.Y = std::move(samples.nu);
  return s;
}

Message outbox(const RState& s) { return RMessage{s.X, s.Y}; }

RState apply(RState s, Inbox inbox, const ProtocolParams& p) {
  require_nonempty(inbox);
  bool changed = false;
  for (const Message* m : inbox) {
    const auto& msg = expect<RMessage>(m);
    changed |= fold_min(s.X, msg.X);
    changed |= fold_min(s.Y, msg.Y);
  }
  if (changed) ++s.revision;
  s.x = ratio_estimate(p.a, s.Y, s.X);
  return s;
}

std::optional<double> estimate(const RState& s) { return s.x; }

// Rbar

std::vector<QuantExponent> quantize_all(std::span<const double> values, double beta) {
  std::vector<QuantExponent> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(quantize(v, beta));
  return out;
}

RbarState rbar_init_from_samples(const Samples& samples, const ProtocolParams& p) {
  if (samples.sigma.size() != p.ell || samples.nu.size() != p.ell)
    throw std::invalid_argument("sample vectors must have length ell");
  const double beta = beta_of(p);
  RbarState s;
  s.X = quantize_all(samples.sigma, beta);
  s.Y = quantize_all(samples.nu, beta);
  return s;
}

Message outbox(const RbarState& s) { return RbarMessage{s.cursor, s.X[s.cursor], s.Y[s.cursor]}; }

RbarState apply(RbarState s, Inbox inbox, const ProtocolParams& p) {
  require_nonempty(inbox);
  const std::size_t i = s.cursor;
  bool changed = false;
  for (const Message* m : inbox) {
    const auto& msg = expect<RbarMessage>(m);
    if (msg.cursor != s.cursor)
      throw std::logic_error("cursor mismatch: agents must advance in lockstep");
    if (msg.x < s.X[i]) {
      s.X[i] = msg.x;
      changed = true;
    }
    if (msg.y < s.Y[i]) {
      s.Y[i] = msg.y;
      changed = true;
    }
  }
  if (changed) ++s.revision;
  if (++s.cursor == s.X.size()) {
    s.x = ratio_estimate(p.a, s.Y, s.X, beta_of(p));
    s.cursor = 0;
  }
  return s;
}

std::optional<double> estimate(const RbarState& s) { return s.x; }

// RbarD

RbarDState rbard_init_from_samples(const Samples& samples, const ProtocolParams& p,
                                   std::uint64_t start_round) {
  if (start_round < 1) throw std::invalid_argument("start rounds are numbered from 1");
  if (samples.sigma.size() != p.ell || samples.nu.size() != p.ell)
    throw std::invalid_argument("sample vectors must have length ell");
  const double beta = beta_of(p);
  RbarDState s;
  s.start_round = start_round;
  s.X = quantize_all(samples.sigma, beta);
  s.Y = quantize_all(samples.nu, beta);
  s.n_est = static_cast<double>(p.ell) / dequantized_sum(s.Y, beta);
  return s;
}

RbarDState wake(RbarDState s, std::uint64_t t) {
  if (!s.active && t >= s.start_round) s.active = true;
  return s;
}

Message outbox(const RbarDState& s) {
  if (!s.active) return NullMessage{};
  return RbarDMessage{s.C, s.X, s.Y};
}

RbarDState apply(RbarDState s, Inbox inbox, const ProtocolParams& p, std::uint64_t t) {
  require_nonempty(inbox);
  if (!s.active) return s;
  const double beta = beta_of(p);

  bool saw_null = false;
  std::uint64_t min_counter = std::numeric_limits<std::uint64_t>::max();
  bool changed = false;
  for (const Message* m : inbox) {
    if (std::holds_alternative<NullMessage>(*m)) {
      saw_null = true;
      continue;
    }
    const auto& msg = expect<RbarDMessage>(m);
    min_counter = std::min(min_counter, msg.C);
    changed |= fold_min(s.X, msg.X);
    changed |= fold_min(s.Y, msg.Y);
  }
  s.C = saw_null ? 0 : 1 + min_counter;
  if (changed) ++s.revision;

  s.n_est = static_cast<double>(p.ell) / dequantized_sum(s.Y, beta);
  if (!s.d && static_cast<double>(s.C) > 1.5 * s.n_est) {
    s.d = ratio_estimate(p.a, s.Y, s.X, beta);
    s.decided_at = t;
  }
  return s;
}

std::optional<double> estimate(const RbarDState& s) { return s.d; }

}  // namespace avgcons
