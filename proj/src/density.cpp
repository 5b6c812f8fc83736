#include "oodsel/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

#include "oodsel/error.hpp"
#include "oodsel/normal.hpp"
#include "oodsel/textio.hpp"

namespace oodsel {
namespace {

constexpr double kKernelCutoff = 8.0;
constexpr std::size_t kMinGridPoints = 16;

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void check_samples(std::span<const double> samples) {
  if (samples.size() < 2)
    throw InvalidInput("density estimation needs at least 2 samples, got " + std::to_string(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!std::isfinite(samples[i])) throw InvalidInput("non-finite sample at index " + std::to_string(i));
}

std::vector<double> evaluate_mixture(const std::vector<MixtureComponent>& comps, double lo, double step,
                                     std::size_t m) {
  std::vector<double> out(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double x = lo + static_cast<double>(j) * step;
    double acc = 0.0;
    for (const auto& c : comps) acc += c.weight * normal::pdf(x, c.mean, c.sd);
    out[j] = acc;
  }
  return out;
}

}  // namespace

void GridSpec::validate() const {
  if (points < kMinGridPoints)
    throw InvalidInput("grid needs at least 16 points, got " + std::to_string(points));
  if (!(padding >= 0.0) || !std::isfinite(padding))
    throw InvalidInput("grid padding must be finite and >= 0");
}

std::string BandwidthRule::name() const {
  switch (kind) {
    case Kind::silverman: return "silverman";
    case Kind::scott: return "scott";
    case Kind::fixed: return "fixed(" + format_double(value) + ")";
  }
  return "?";
}

double trapezoid(std::span<const double> values, double step) {
  if (values.size() < 2) return 0.0;
  double inner = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) inner += values[i];
  return step * (inner + 0.5 * (values.front() + values.back()));
}

Density1D::Density1D(double lo, double hi, std::vector<double> mass, double bandwidth, DensitySource source)
    : lo_(lo), hi_(hi), mass_(std::move(mass)), bandwidth_(bandwidth), source_(std::move(source)) {
  if (mass_.size() < kMinGridPoints)
    throw InvalidInput("density grid needs at least 16 points, got " + std::to_string(mass_.size()));
  if (!(lo_ < hi_) || !std::isfinite(lo_) || !std::isfinite(hi_))
    throw InvalidInput("density support must be a finite interval with lo < hi");
  if (!(bandwidth_ > 0.0)) throw InvalidInput("density bandwidth must be positive");
  for (double v : mass_)
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput("density mass must be finite and nonnegative");
  const double total = trapezoid(mass_, step());
  if (!(total > 0.0))
    throw RuntimeFailure("density has zero mass on its grid [" + format_double(lo_) + ", " + format_double(hi_) + "]");
  for (double& v : mass_) v /= total;
}

double Density1D::x(std::size_t i) const {
  return i + 1 == mass_.size() ? hi_ : lo_ + static_cast<double>(i) * step();
}

std::vector<double> Density1D::grid() const {
  std::vector<double> g(mass_.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = x(i);
  return g;
}

bool Density1D::same_grid(const Density1D& other) const {
  return lo_ == other.lo_ && hi_ == other.hi_ && mass_.size() == other.mass_.size();
}

Density1D Density1D::resampled(double lo, double hi, std::size_t m) const {
  if (lo == lo_ && hi == hi_ && m == mass_.size()) return *this;
  if (const auto* k = std::get_if<KernelSource>(&source_)) return kde_on_grid(k->samples, k->bandwidth, lo, hi, m);
  if (m < kMinGridPoints || !(lo < hi)) throw InvalidInput("invalid resampling grid");
  const double step_new = (hi - lo) / static_cast<double>(m - 1);
  if (const auto* mix = std::get_if<MixtureSource>(&source_))
    return Density1D(lo, hi, evaluate_mixture(mix->components, lo, step_new, m), bandwidth_, *mix);

  std::vector<double> out(m, 0.0);
  const double s = step();
  for (std::size_t j = 0; j < m; ++j) {
    const double xv = lo + static_cast<double>(j) * step_new;
    if (xv < lo_ || xv > hi_) continue;
    const double pos = (xv - lo_) / s;
    const auto i = std::min(static_cast<std::size_t>(pos), mass_.size() - 2);
    const double frac = pos - static_cast<double>(i);
    out[j] = mass_[i] + frac * (mass_[i + 1] - mass_[i]);
  }
  return Density1D(lo, hi, std::move(out), bandwidth_);
}

double select_bandwidth(std::span<const double> samples, const BandwidthRule& rule) {
  if (rule.kind == BandwidthRule::Kind::fixed) {
    if (!(rule.value > 0.0) || !std::isfinite(rule.value))
      throw InvalidInput("fixed bandwidth must be positive and finite");
    return rule.value;
  }
  check_samples(samples);
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  double spread = sd;
  if (rule.kind == BandwidthRule::Kind::silverman) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(n, -0.2);
  }
  return 1.06 * spread * std::pow(n, -0.2);
}

double fallback_bandwidth(std::span<const double> samples) {
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  return 1e-3 * std::max(std::abs(mean), 1.0);
}

void accumulate_kernels(std::span<const double> samples, double bandwidth, double lo, double step,
                        std::span<double> out) {
  const std::size_t m = out.size();
  if (m == 0) return;
  const double delta = step / bandwidth;
  const double q = std::exp(-delta * delta);
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(kKernelCutoff / delta)) + 1;
  const auto last = static_cast<std::ptrdiff_t>(m) - 1;
  for (double s : samples) {
    const double pos = (s - lo) / step;
    const auto j0 = std::clamp(static_cast<std::ptrdiff_t>(std::llround(pos)), std::ptrdiff_t{0}, last);
    const double u0 = (lo + static_cast<double>(j0) * step - s) / bandwidth;
    if (std::abs(u0) > kKernelCutoff + delta) continue;
    const double g0 = std::exp(-0.5 * u0 * u0);

    // Rightward: g_{j+1} = g_j * r_j, r_{j+1} = r_j * q.
    double g = g0;
    double r = std::exp(-(u0 * delta + 0.5 * delta * delta));
    const auto right_end = std::min(last, j0 + reach);
    for (std::ptrdiff_t j = j0; j <= right_end; ++j) {
      out[static_cast<std::size_t>(j)] += g;
      g *= r;
      r *= q;
    }
    // Leftward mirror of the above.
    g = g0;
    r = std::exp(u0 * delta - 0.5 * delta * delta);
    const auto left_end = std::max(std::ptrdiff_t{0}, j0 - reach);
    for (std::ptrdiff_t j = j0 - 1; j >= left_end; --j) {
      g *= r;
      r *= q;
      out[static_cast<std::size_t>(j)] += g;
    }
  }
}

Density1D kde_on_grid(std::shared_ptr<const std::vector<double>> samples, double bandwidth, double lo, double hi,
                      std::size_t m) {
  if (!samples || samples->empty()) throw InvalidInput("KDE needs samples");
  if (m < kMinGridPoints) throw InvalidInput("density grid needs at least 16 points, got " + std::to_string(m));
  if (!(lo < hi)) throw InvalidInput("KDE grid needs lo < hi");
  const double step = (hi - lo) / static_cast<double>(m - 1);
  // A kernel narrower than the grid step cannot be tabulated; widen it.
  const double h = std::max(bandwidth, step);
  std::vector<double> mass(m, 0.0);
  accumulate_kernels(*samples, h, lo, step, mass);
  const double norm = 1.0 / (static_cast<double>(samples->size()) * h * std::sqrt(2.0 * std::numbers::pi));
  for (double& v : mass) v *= norm;
  return Density1D(lo, hi, std::move(mass), h, KernelSource{std::move(samples), h});
}

Density1D estimate_density(std::span<const double> samples, const BandwidthRule& rule, const GridSpec& grid) {
  grid.validate();
  check_samples(samples);
  double h = select_bandwidth(samples, rule);
  if (!(h > 0.0)) {
    h = fallback_bandwidth(samples);
    warn("zero sample spread; using fallback bandwidth " + format_double(h));
  }
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  double lo = *mn - grid.padding * h;
  double hi = *mx + grid.padding * h;
  if (!(lo < hi)) {
    lo = *mn - h;
    hi = *mx + h;
  }
  auto shared = std::make_shared<const std::vector<double>>(samples.begin(), samples.end());
  return kde_on_grid(std::move(shared), h, lo, hi, grid.points);
}

Density1D gaussian_density(double mean, double sd, const GridSpec& grid) {
  return mixture_density({{1.0, mean, sd}}, grid);
}

Density1D mixture_density(std::vector<MixtureComponent> components, const GridSpec& grid) {
  grid.validate();
  if (components.empty()) throw InvalidInput("mixture needs at least one component");
  double total = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double min_sd = lo;
  const double reach = std::max(6.0, grid.padding);
  for (const auto& c : components) {
    if (!(c.sd > 0.0) || !std::isfinite(c.sd)) throw InvalidInput("Gaussian sd must be positive");
    if (!(c.weight > 0.0) || !std::isfinite(c.mean)) throw InvalidInput("mixture weights must be positive");
    total += c.weight;
    lo = std::min(lo, c.mean - reach * c.sd);
    hi = std::max(hi, c.mean + reach * c.sd);
    min_sd = std::min(min_sd, c.sd);
  }
  for (auto& c : components) c.weight /= total;
  const double step = (hi - lo) / static_cast<double>(grid.points - 1);
  auto mass = evaluate_mixture(components, lo, step, grid.points);
  return Density1D(lo, hi, std::move(mass), min_sd, MixtureSource{std::move(components)});
}

}  // namespace oodsel
