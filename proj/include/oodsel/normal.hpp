#pragma once

#include <cmath>
#include <numbers>

namespace oodsel::normal {

inline double pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double pdf(double x, double mean, double sd) {
  return pdf((x - mean) / sd) / sd;
}

inline double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Upper tail 1 - cdf(x), computed without cancellation.
inline double sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace oodsel::normal
