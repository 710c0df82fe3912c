#pragma once

#include <compare>
#include <cstdint>

namespace avgcons {

/// Integer exponent k standing for the level (1+beta)^k. The ratio beta lives
/// in ProtocolParams; exponents are compared and transmitted as integers.
struct QuantExponent {
  std::int64_t k = 0;

  friend auto operator<=>(const QuantExponent&, const QuantExponent&) = default;
};

/// Rounds x down to the previous power of 1+beta and returns its exponent,
/// so that dequantize(q) <= x < dequantize(q) * (1+beta).
QuantExponent quantize(double x, double beta);

/// (1+beta)^k.
double dequantize(QuantExponent q, double beta);

/// Number of distinct exponents hit by values in [c, d].
std::int64_t count_levels(double c, double d, double beta);

struct AdmissibleInterval {
  double z = 0.0;
  double upper = 0.0;  // ln(1/z)
};

/// Interval [z, ln 1/z] with z = eta / (4 (b-a+2) ell n) that contains every
/// generated sample with probability at least 1 - eta/2. Requires z < 1/16.
AdmissibleInterval admissible_interval(double eta, std::uint64_t ell, std::uint64_t n,
                                       double a, double b);

/// Bits of the narrowest two's-complement integer holding every value in
/// [lo, hi].
unsigned twos_complement_width(std::int64_t lo, std::int64_t hi);

}  // namespace avgcons
