#pragma once

#include <span>
#include <string>

#include "oodsel/density.hpp"

namespace oodsel {

struct DivergenceKind {
  enum class Type { total_variation, symmetric_kl, l2 };
  Type type = Type::total_variation;
  double floor = 1e-12;  // density floor applied before logs (symmetric_kl)

  static DivergenceKind total_variation() { return {Type::total_variation, 1e-12}; }
  static DivergenceKind symmetric_kl(double floor = 1e-12) { return {Type::symmetric_kl, floor}; }
  static DivergenceKind l2() { return {Type::l2, 1e-12}; }

  // "tv", "symkl" or "l2".
  std::string name() const;
  static DivergenceKind parse(const std::string& name, double floor = 1e-12);
  void validate() const;
};

// Distance between two densities tabulated on the same grid:
//   tv    = 1/2 * int |p - q|            (clamped to [0, 1])
//   symkl = 1/2 * int (p - q)(log p - log q), both floored at kind.floor
//   l2    = sqrt(int (p - q)^2)
// Integrals use the trapezoid rule with the given step.
double divergence_on_grid(std::span<const double> p, std::span<const double> q, double step,
                          const DivergenceKind& kind);

// Re-evaluates p and q on the union of their supports with max(m_p, m_q)
// points (skipped when the grids already match), then applies
// divergence_on_grid.
double divergence(const Density1D& p, const Density1D& q, const DivergenceKind& kind);

// (mu1 - mu2)^2 / (2 sigma^2): symmetric KL between N(mu1, s^2), N(mu2, s^2).
double gaussian_sym_kl(double mu1, double mu2, double sigma);

// 2 Phi(|mu1 - mu2| / (2 sigma)) - 1: total variation between equal-variance
// Gaussians.
double gaussian_tv(double mu1, double mu2, double sigma);

}  // namespace oodsel
