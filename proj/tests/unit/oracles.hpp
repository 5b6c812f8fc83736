#pragma once

// Reference computations for the tests. Deliberately independent of the
// library: plain composite Simpson quadrature on explicit pdfs.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double npdf(double x, double mean = 0.0, double sd = 1.0) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}

// Standard normal CDF by quadrature from -12.
inline double ncdf(double x) {
  if (x < -12.0) return 0.0;
  return simpson([](double t) { return npdf(t); }, -12.0, x, 40000);
}

inline double tv(const std::function<double(double)>& p, const std::function<double(double)>& q, double lo,
                 double hi) {
  return 0.5 * simpson([&](double x) { return std::abs(p(x) - q(x)); }, lo, hi, 200000);
}

inline double sym_kl(const std::function<double(double)>& p, const std::function<double(double)>& q, double lo,
                     double hi) {
  return 0.5 * simpson(
                   [&](double x) {
                     const double a = p(x), b = q(x);
                     if (a <= 0.0 || b <= 0.0) return 0.0;
                     return (a - b) * (std::log(a) - std::log(b));
                   },
                   lo, hi, 200000);
}

inline std::vector<double> normal_draws(std::size_t n, double mean, double sd, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(mean, sd);
  std::vector<double> out(n);
  for (auto& x : out) x = g(rng);
  return out;
}

}  // namespace oracle
