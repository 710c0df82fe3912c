#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace avgcons {

/// Purpose tags separate the random streams a trial draws from, so that the
/// schedule never shares randomness with the agents' oracles.
enum class Purpose : std::uint64_t {
  Samples = 1,
  Inputs = 2,
  Schedule = 3,
  StartRounds = 4,
  Experiment = 5,
  Test = 6,
};

struct StreamKey {
  std::uint64_t master = 0;
  std::uint64_t trial = 0;
  std::uint64_t agent = 0;
  Purpose purpose = Purpose::Samples;
};

/// Keyed counter-based generator (SplitMix64 finalizer over key + counter).
/// Identical keys reproduce identical sequences; the position counter is the
/// only mutable state. Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(StreamKey{}) {}
  explicit RngStream(const StreamKey& key);
  RngStream(std::uint64_t master, std::uint64_t trial, std::uint64_t agent,
            Purpose purpose)
      : RngStream(StreamKey{master, trial, agent, purpose}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform on (0, 1]; zero is never returned.
  double uniform();

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

/// Inverse CDF of Exp(rate) evaluated at u in (0, 1].
inline double exponential_from_uniform(double rate, double u) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
  if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("uniform variate must lie in (0, 1]");
  return -std::log(u) / rate;
}

/// Any source exposing `double uniform()` on (0, 1]. Tests use scripted
/// sources to inject exact variates.
template <class S>
concept UniformSource = requires(S& s) {
  { s.uniform() } -> std::convertible_to<double>;
};

template <UniformSource S>
double sample_exponential(double rate, S& source) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
  return exponential_from_uniform(rate, source.uniform());
}

enum class ProtocolKind { Min, R, Rbar, RbarD };

const char* to_string(ProtocolKind kind);
ProtocolKind protocol_from_string(const std::string& name);

struct ProtocolParams {
  double epsilon = 0.25;
  double eta = 0.25;
  double a = 0.0;
  double b = 1.0;
  std::uint64_t ell = 1;
  std::optional<double> beta;  // absent for plain R
  std::optional<double> N;     // network-size bound, RbarD only

  double span() const { return b - a + 1.0; }
};

// Replication-count formulas before the ceiling. Evaluated in long double:
// the ceilings of these values land close to integers for round inputs.
long double ell_formula_R(double epsilon, double eta, double a, double b);
long double ell_formula_Rbar(double epsilon, double eta, double a, double b);
long double ell_formula_RbarD_accuracy(double epsilon, double eta, double a, double b);
long double ell_formula_RbarD_firing(double eta, double N);

ProtocolParams params_R(double epsilon, double eta, double a, double b);
ProtocolParams params_Rbar(double epsilon, double eta, double a, double b);
ProtocolParams params_RbarD(double epsilon, double eta, double a, double b, double N);
/// Min has no replication; only [a, b] is meaningful.
ProtocolParams params_Min(double a, double b);
ProtocolParams params_for(ProtocolKind kind, double epsilon, double eta, double a,
                          double b, std::optional<double> N);

struct ConcentrationParams {
  std::uint64_t ell = 1;
  double lambda = 1.0;
  double alpha = 0.1;
  std::optional<double> beta;
};

/// 2 exp(-ell alpha^2 / 3); shared by the rounded and unrounded variants.
double tail_bound(const ConcentrationParams& cp);

/// Deviation threshold as a multiple of 1/lambda: alpha, or
/// alpha + beta + alpha*beta for the rounded variant.
double tail_threshold(const ConcentrationParams& cp);

/// Fraction of `reps` experiments in which the mean of `ell` Exp(lambda)
/// draws (rounded down to powers of 1+beta when beta is set) deviates from
/// 1/lambda by at least tail_threshold/lambda.
double empirical_tail(const ConcentrationParams& cp, std::uint64_t reps,
                      RngStream& stream);

/// Binomial standard deviation sqrt(p(1-p)/trials).
double binomial_sigma(double p, std::uint64_t trials);

struct MinOfExponentialsStats {
  double mean = 0.0;
  double total_rate = 0.0;
  std::vector<double> points;
  std::vector<double> survival;  // empirical P(min > x) at each point
};

/// Draws `reps` minima of independent Exp(rates[i]) variates.
MinOfExponentialsStats min_of_exponentials(const std::vector<double>& rates,
                                           const std::vector<double>& points,
                                           std::uint64_t reps, RngStream& stream);

}  // namespace avgcons
