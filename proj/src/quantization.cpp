#include "avgcons/quantization.hpp"

#include <cmath>
#include <stdexcept>

namespace avgcons {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta) || 1.0 + beta == 1.0)
    throw std::invalid_argument("rounding ratio beta must be positive and resolvable");
}

}  // namespace

double dequantize(QuantExponent q, double beta) {
  check_beta(beta);
  return std::pow(1.0 + beta, static_cast<double>(q.k));
}

QuantExponent quantize(double x, double beta) {
  check_beta(beta);
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::invalid_argument("quantize: value must be positive and finite");
  QuantExponent q{static_cast<std::int64_t>(std::floor(std::log(x) / std::log1p(beta)))};
  // The logarithm ratio can land one step off near exact powers; settle the
  // exponent against the same pow() that dequantize uses.
  while (dequantize(QuantExponent{q.k + 1}, beta) <= x) ++q.k;
  while (dequantize(q, beta) > x) --q.k;
  return q;
}

std::int64_t count_levels(double c, double d, double beta) {
  if (!(c > 0.0) || !(c <= d) || !std::isfinite(d))
    throw std::invalid_argument("count_levels: need 0 < c <= d");
  return quantize(d, beta).k - quantize(c, beta).k + 1;
}

AdmissibleInterval admissible_interval(double eta, std::uint64_t ell, std::uint64_t n,
                                       double a, double b) {
  if (!(eta > 0.0) || ell == 0 || n == 0 || !(a <= b))
    throw std::invalid_argument("admissible_interval: parameters must be positive with a <= b");
  const double z = eta / (4.0 * (b - a + 2.0) * static_cast<double>(ell) *
                          static_cast<double>(n));
  if (!(z < 1.0 / 16.0))
    throw std::invalid_argument("admissible_interval: z must be below 1/16");
  return {z, std::log(1.0 / z)};
}

unsigned twos_complement_width(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw std::invalid_argument("twos_complement_width: empty range");
  unsigned w = 1;
  while (w < 64) {
    const std::int64_t min = -(std::int64_t{1} << (w - 1));
    const std::int64_t max = (std::int64_t{1} << (w - 1)) - 1;
    if (lo >= min && hi <= max) return w;
    ++w;
  }
  return 64;
}

}  // namespace avgcons
