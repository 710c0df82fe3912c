#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "avgcons/quantization.hpp"
#include "avgcons/sampling.hpp"

namespace avgcons {

// Messages ------------------------------------------------------------------

/// Heartbeat of a passive agent.
struct NullMessage {};
struct MinMessage {
  double x = 0.0;
};
struct RMessage {
  std::vector<double> X;
  std::vector<double> Y;
};
/// One entry pair of the quantized vectors, tagged with its cursor position.
struct RbarMessage {
  std::uint64_t cursor = 0;
  QuantExponent x;
  QuantExponent y;
};
struct RbarDMessage {
  std::uint64_t C = 0;
  std::vector<QuantExponent> X;
  std::vector<QuantExponent> Y;
};

using Message = std::variant<NullMessage, MinMessage, RMessage, RbarMessage, RbarDMessage>;

/// Messages received in one round, the agent's own message included.
using Inbox = std::span<const Message* const>;

// Samples -------------------------------------------------------------------

/// The agent's private draws: sigma ~ Exp(theta - a + 1), nu ~ Exp(1).
struct Samples {
  std::vector<double> sigma;
  std::vector<double> nu;
};

void check_input(double theta, const ProtocolParams& p);

template <UniformSource S>
Samples draw_samples(double theta, const ProtocolParams& p, S& source) {
  check_input(theta, p);
  const double rate = theta - p.a + 1.0;
  Samples s;
  s.sigma.reserve(p.ell);
  s.nu.reserve(p.ell);
  for (std::uint64_t i = 0; i < p.ell; ++i) s.sigma.push_back(sample_exponential(rate, source));
  for (std::uint64_t i = 0; i < p.ell; ++i) s.nu.push_back(sample_exponential(1.0, source));
  return s;
}

/// a - 1 + sumY / sumX, summed left to right so equal vectors give
/// bit-identical estimates on every agent.
double ratio_estimate(double a, std::span<const double> Y, std::span<const double> X);
double ratio_estimate(double a, std::span<const QuantExponent> Y,
                      std::span<const QuantExponent> X, double beta);

// Min -----------------------------------------------------------------------

struct MinState {
  double x = 0.0;
};

MinState min_init(double theta);
Message outbox(const MinState& s);
MinState apply(MinState s, Inbox inbox, const ProtocolParams& p);
std::optional<double> estimate(const MinState& s);

// R -------------------------------------------------------------------------

struct RState {
  std::vector<double> X;
  std::vector<double> Y;
  std::optional<double> x;
  /// Bumped whenever some vector entry decreases.
  std::uint64_t revision = 0;
};

RState r_init_from_samples(Samples samples, const ProtocolParams& p);

template <UniformSource S>
RState r_init(double theta, const ProtocolParams& p, S& source) {
  return r_init_from_samples(draw_samples(theta, p, source), p);
}

Message outbox(const RState& s);
/// Entrywise minimum over the inbox, then x <- a - 1 + sum(Y)/sum(X).
RState apply(RState s, Inbox inbox, const ProtocolParams& p);
std::optional<double> estimate(const RState& s);

// Rbar ----------------------------------------------------------------------

/// Quantized vectors exchanged one entry per round. `cursor` is the 0-based
/// entry sent and updated in the next round.
struct RbarState {
  std::vector<QuantExponent> X;
  std::vector<QuantExponent> Y;
  std::uint64_t cursor = 0;
  std::optional<double> x;
  std::uint64_t revision = 0;
};

std::vector<QuantExponent> quantize_all(std::span<const double> values, double beta);

RbarState rbar_init_from_samples(const Samples& samples, const ProtocolParams& p);

template <UniformSource S>
RbarState rbar_init(double theta, const ProtocolParams& p, S& source) {
  return rbar_init_from_samples(draw_samples(theta, p, source), p);
}

Message outbox(const RbarState& s);
/// Minimum at the cursor entry only; the estimate is recomputed when the
/// cursor wraps. Throws if a received cursor differs from the agent's own.
RbarState apply(RbarState s, Inbox inbox, const ProtocolParams& p);
std::optional<double> estimate(const RbarState& s);

// RbarD ---------------------------------------------------------------------

struct RbarDState {
  bool active = false;
  std::uint64_t start_round = 1;
  std::vector<QuantExponent> X;
  std::vector<QuantExponent> Y;
  std::uint64_t C = 0;
  double n_est = 0.0;
  /// Write-once decision value.
  std::optional<double> d;
  std::optional<std::uint64_t> decided_at;
  std::uint64_t revision = 0;
};

RbarDState rbard_init_from_samples(const Samples& samples, const ProtocolParams& p,
                                   std::uint64_t start_round);

template <UniformSource S>
RbarDState rbard_init(double theta, const ProtocolParams& p, S& source,
                      std::uint64_t start_round) {
  return rbard_init_from_samples(draw_samples(theta, p, source), p, start_round);
}

/// Called at the start of round t; activates the agent once t reaches its
/// start round.
RbarDState wake(RbarDState s, std::uint64_t t);

/// Null while passive, <C, X, Y> once active.
Message outbox(const RbarDState& s);
/// Round t's update. Passive agents discard their inbox. Active agents reset
/// C on any null message and otherwise take 1 + min of the received
/// counters, fold the non-null vectors in, refresh n_est = ell / sum(Y), and
/// decide once C > 3 n_est / 2.
RbarDState apply(RbarDState s, Inbox inbox, const ProtocolParams& p, std::uint64_t t);
std::optional<double> estimate(const RbarDState& s);

}  // namespace avgcons
