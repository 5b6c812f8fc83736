#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace oodsel {

// Point count and padding (in bandwidths, or standard deviations for exact
// Gaussian densities) of the evaluation grid.
struct GridSpec {
  std::size_t points = 512;
  double padding = 3.0;

  void validate() const;
};

struct BandwidthRule {
  enum class Kind { silverman, scott, fixed };
  Kind kind = Kind::silverman;
  double value = 0.0;  // bandwidth for Kind::fixed

  static BandwidthRule silverman() { return {Kind::silverman, 0.0}; }
  static BandwidthRule scott() { return {Kind::scott, 0.0}; }
  static BandwidthRule fixed(double h) { return {Kind::fixed, h}; }

  std::string name() const;
};

struct MixtureComponent {
  double weight;
  double mean;
  double sd;
};

// What generated a density, kept so it can be re-evaluated on another grid
// instead of being interpolated.
struct KernelSource {
  std::shared_ptr<const std::vector<double>> samples;
  double bandwidth;
};
struct MixtureSource {
  std::vector<MixtureComponent> components;
};
using DensitySource = std::variant<std::monostate, KernelSource, MixtureSource>;

// A density tabulated on a uniform grid over [lo, hi]. mass is normalized so
// the trapezoidal integral over the grid is 1.
class Density1D {
 public:
  Density1D(double lo, double hi, std::vector<double> mass, double bandwidth,
            DensitySource source = {});

  std::size_t size() const { return mass_.size(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double step() const { return (hi_ - lo_) / static_cast<double>(mass_.size() - 1); }
  double x(std::size_t i) const;
  std::vector<double> grid() const;
  std::span<const double> mass() const { return mass_; }
  double bandwidth() const { return bandwidth_; }
  const DensitySource& source() const { return source_; }

  bool same_grid(const Density1D& other) const;

  // Density re-evaluated on [lo, hi] with m points and renormalized. Uses the
  // generating source when available, otherwise linear interpolation with zero
  // outside the current support.
  Density1D resampled(double lo, double hi, std::size_t m) const;

 private:
  double lo_;
  double hi_;
  std::vector<double> mass_;
  double bandwidth_;
  DensitySource source_;
};

double trapezoid(std::span<const double> values, double step);

// Bandwidth selected by rule for samples. Silverman: 0.9 min(sd, IQR/1.34)
// n^-1/5 (sd alone when the IQR is 0); Scott: 1.06 sd n^-1/5. Returns 0 when
// the data-driven estimate degenerates (zero spread).
double select_bandwidth(std::span<const double> samples, const BandwidthRule& rule);

// Fallback used for zero-spread samples: 1e-3 * max(|mean|, 1).
double fallback_bandwidth(std::span<const double> samples);

// Adds the unnormalized Gaussian kernels exp(-((x_j - s)/h)^2 / 2) of every
// sample to out[j], x_j = lo + j*step, truncated at 8 bandwidths. The kernel
// is advanced by a multiplicative recurrence along the grid, so each sample
// costs three exponentials. Summation order is the sample order.
void accumulate_kernels(std::span<const double> samples, double bandwidth, double lo, double step,
                        std::span<double> out);

// Gaussian KDE on a grid spanning [min - padding*h, max + padding*h].
// Zero-variance samples with a data-driven rule fall back to
// fallback_bandwidth() with a warning.
Density1D estimate_density(std::span<const double> samples, const BandwidthRule& rule = {},
                           const GridSpec& grid = {});

// KDE of samples with a given bandwidth on an explicit grid.
Density1D kde_on_grid(std::shared_ptr<const std::vector<double>> samples, double bandwidth, double lo,
                      double hi, std::size_t m);

// Exact normal pdf on mean +- max(6, padding) sd.
Density1D gaussian_density(double mean, double sd, const GridSpec& grid = {});

// Exact Gaussian mixture pdf on [min mean - max(6,padding) sd, max mean + ...].
// Weights must be positive; they are normalized to sum to 1.
Density1D mixture_density(std::vector<MixtureComponent> components, const GridSpec& grid = {});

}  // namespace oodsel
