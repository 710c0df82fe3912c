#include "avgcons/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avgcons/quantization.hpp"

namespace avgcons {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

void check_open_half(double v, const char* what) {
  if (!(v > 0.0 && v < 0.5))
    throw std::invalid_argument(std::string(what) + " must lie in (0, 1/2)");
}

void check_common(double epsilon, double eta, double a, double b) {
  check_open_half(epsilon, "epsilon");
  check_open_half(eta, "eta");
  if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("input range needs finite a <= b");
}

std::uint64_t ceil_ell(long double value) {
  const long double c = std::ceil(value);
  if (!(c >= 1.0L) || c > 1.0e18L) throw std::invalid_argument("replication count out of range");
  return static_cast<std::uint64_t>(c);
}

long double squared_span(double a, double b) {
  const long double s = static_cast<long double>(b) - a + 1.0L;
  return s * s;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

RngStream::RngStream(const StreamKey& key) {
  std::uint64_t h = mix64(key.master + kGolden);
  h = mix64(h ^ (key.trial + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (key.agent + 0x8cb92ba72f3d8dd7ULL));
  h = mix64(h ^ (static_cast<std::uint64_t>(key.purpose) + 0xd1b54a32d192ed03ULL));
  key_ = h;
}

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  // 53 random bits mapped onto {1, ..., 2^53} / 2^53.
  const std::uint64_t bits = (*this)() >> 11;
  return static_cast<double>(bits + 1) * 0x1.0p-53;
}

const char* to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::Min: return "min";
    case ProtocolKind::R: return "r";
    case ProtocolKind::Rbar: return "rbar";
    case ProtocolKind::RbarD: return "rbard";
  }
  return "?";
}

ProtocolKind protocol_from_string(const std::string& name) {
  if (name == "min") return ProtocolKind::Min;
  if (name == "r") return ProtocolKind::R;
  if (name == "rbar") return ProtocolKind::Rbar;
  if (name == "rbard") return ProtocolKind::RbarD;
  throw std::invalid_argument("unknown protocol '" + name + "'");
}

long double ell_formula_R(double epsilon, double eta, double a, double b) {
  return 27.0L * std::log(4.0L / eta) * squared_span(a, b) /
         (static_cast<long double>(epsilon) * epsilon);
}

long double ell_formula_Rbar(double epsilon, double eta, double a, double b) {
  return 108.0L * std::log(8.0L / eta) * squared_span(a, b) /
         (static_cast<long double>(epsilon) * epsilon);
}

long double ell_formula_RbarD_accuracy(double epsilon, double eta, double a, double b) {
  return 108.0L * std::log(24.0L / eta) * squared_span(a, b) /
         (static_cast<long double>(epsilon) * epsilon);
}

long double ell_formula_RbarD_firing(double eta, double N) {
  const long double bound = N;
  return 243.0L * std::log(6.0L * bound * bound / eta);
}

ProtocolParams params_R(double epsilon, double eta, double a, double b) {
  check_common(epsilon, eta, a, b);
  ProtocolParams p{epsilon, eta, a, b, ceil_ell(ell_formula_R(epsilon, eta, a, b)), {}, {}};
  return p;
}

ProtocolParams params_Rbar(double epsilon, double eta, double a, double b) {
  check_common(epsilon, eta, a, b);
  ProtocolParams p{epsilon, eta, a, b, ceil_ell(ell_formula_Rbar(epsilon, eta, a, b)), {}, {}};
  p.beta = epsilon / (8.0 * p.span());
  return p;
}

ProtocolParams params_RbarD(double epsilon, double eta, double a, double b, double N) {
  check_common(epsilon, eta, a, b);
  if (!(N >= 1.0) || !std::isfinite(N)) throw std::invalid_argument("N must be at least 1");
  const std::uint64_t accuracy = ceil_ell(ell_formula_RbarD_accuracy(epsilon, eta, a, b));
  const std::uint64_t firing = ceil_ell(ell_formula_RbarD_firing(eta, N));
  ProtocolParams p{epsilon, eta, a, b, std::max(accuracy, firing), {}, N};
  p.beta = epsilon / (8.0 * p.span());
  return p;
}

ProtocolParams params_Min(double a, double b) {
  if (!(a <= b)) throw std::invalid_argument("input range needs a <= b");
  ProtocolParams p;
  p.a = a;
  p.b = b;
  p.ell = 1;
  return p;
}

ProtocolParams params_for(ProtocolKind kind, double epsilon, double eta, double a, double b,
                          std::optional<double> N) {
  switch (kind) {
    case ProtocolKind::Min: {
      auto p = params_Min(a, b);
      p.epsilon = epsilon;
      p.eta = eta;
      return p;
    }
    case ProtocolKind::R: return params_R(epsilon, eta, a, b);
    case ProtocolKind::Rbar: return params_Rbar(epsilon, eta, a, b);
    case ProtocolKind::RbarD:
      if (!N) throw std::invalid_argument("rbard requires the network-size bound N");
      return params_RbarD(epsilon, eta, a, b, *N);
  }
  throw std::invalid_argument("unknown protocol");
}

double tail_bound(const ConcentrationParams& cp) {
  return 2.0 * std::exp(-static_cast<double>(cp.ell) * cp.alpha * cp.alpha / 3.0);
}

double tail_threshold(const ConcentrationParams& cp) {
  if (!cp.beta) return cp.alpha;
  return cp.alpha + *cp.beta + cp.alpha * *cp.beta;
}

double empirical_tail(const ConcentrationParams& cp, std::uint64_t reps, RngStream& stream) {
  if (reps == 0) throw std::invalid_argument("empirical_tail: reps must be positive");
  if (cp.ell == 0) throw std::invalid_argument("empirical_tail: ell must be positive");
  if (!(cp.lambda > 0.0)) throw std::invalid_argument("empirical_tail: lambda must be positive");
  if (!(cp.alpha > 0.0 && cp.alpha < 0.5))
    throw std::invalid_argument("empirical_tail: alpha must lie in (0, 1/2)");
  const double deviation = tail_threshold(cp) / cp.lambda;
  const double expected = 1.0 / cp.lambda;
  std::uint64_t hits = 0;
  for (std::uint64_t r = 0; r < reps; ++r) {
    double sum = 0.0;
    for (std::uint64_t i = 0; i < cp.ell; ++i) {
      double x = sample_exponential(cp.lambda, stream);
      if (cp.beta) x = dequantize(quantize(x, *cp.beta), *cp.beta);
      sum += x;
    }
    const double mean = sum / static_cast<double>(cp.ell);
    if (std::abs(mean - expected) >= deviation) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reps);
}

double binomial_sigma(double p, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("binomial_sigma: trials must be positive");
  const double q = std::clamp(p, 0.0, 1.0);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
}

MinOfExponentialsStats min_of_exponentials(const std::vector<double>& rates,
                                           const std::vector<double>& points,
                                           std::uint64_t reps, RngStream& stream) {
  if (rates.empty() || reps == 0)
    throw std::invalid_argument("min_of_exponentials: need rates and reps");
  MinOfExponentialsStats stats;
  stats.points = points;
  stats.survival.assign(points.size(), 0.0);
  for (double r : rates) stats.total_rate += r;
  double sum = 0.0;
  for (std::uint64_t rep = 0; rep < reps; ++rep) {
    double m = std::numeric_limits<double>::infinity();
    for (double r : rates) m = std::min(m, sample_exponential(r, stream));
    sum += m;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (m > points[i]) stats.survival[i] += 1.0;
  }
  stats.mean = sum / static_cast<double>(reps);
  for (auto& s : stats.survival) s /= static_cast<double>(reps);
  return stats;
}

}  // namespace avgcons
