#include "oodsel/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oodsel/error.hpp"

namespace oodsel {

std::string DivergenceKind::name() const {
  switch (type) {
    case Type::total_variation: return "tv";
    case Type::symmetric_kl: return "symkl";
    case Type::l2: return "l2";
  }
  return "?";
}

DivergenceKind DivergenceKind::parse(const std::string& name, double floor) {
  DivergenceKind kind;
  if (name == "tv" || name == "total_variation")
    kind = total_variation();
  else if (name == "symkl" || name == "symmetric_kl")
    kind = symmetric_kl(floor);
  else if (name == "l2")
    kind = l2();
  else
    throw InvalidInput("unknown divergence '" + name + "' (expected tv, symkl or l2)");
  kind.validate();
  return kind;
}

void DivergenceKind::validate() const {
  if (type == Type::symmetric_kl && !(floor > 0.0))
    throw InvalidInput("symmetric KL floor must be positive");
}

double divergence_on_grid(std::span<const double> p, std::span<const double> q, double step,
                          const DivergenceKind& kind) {
  if (p.size() != q.size() || p.size() < 2) throw InvalidInput("densities must share a grid of >= 2 points");
  const std::size_t m = p.size();
  auto integrate = [&](auto&& f) {
    double inner = 0.0;
    for (std::size_t i = 1; i + 1 < m; ++i) inner += f(p[i], q[i]);
    return step * (inner + 0.5 * (f(p[0], q[0]) + f(p[m - 1], q[m - 1])));
  };
  switch (kind.type) {
    case DivergenceKind::Type::total_variation: {
      const double tv = 0.5 * integrate([](double a, double b) { return std::abs(a - b); });
      return std::clamp(tv, 0.0, 1.0);
    }
    case DivergenceKind::Type::symmetric_kl: {
      const double floor = kind.floor;
      const double v = 0.5 * integrate([floor](double a, double b) {
        const double fa = std::max(a, floor);
        const double fb = std::max(b, floor);
        return (fa - fb) * (std::log(fa) - std::log(fb));
      });
      return std::max(v, 0.0);
    }
    case DivergenceKind::Type::l2: {
      const double v = integrate([](double a, double b) { return (a - b) * (a - b); });
      return std::sqrt(std::max(v, 0.0));
    }
  }
  return 0.0;
}

double divergence(const Density1D& p, const Density1D& q, const DivergenceKind& kind) {
  kind.validate();
  if (p.same_grid(q)) return divergence_on_grid(p.mass(), q.mass(), p.step(), kind);
  const double lo = std::min(p.lo(), q.lo());
  const double hi = std::max(p.hi(), q.hi());
  const std::size_t m = std::max(p.size(), q.size());
  const auto pr = p.resampled(lo, hi, m);
  const auto qr = q.resampled(lo, hi, m);
  return divergence_on_grid(pr.mass(), qr.mass(), pr.step(), kind);
}

double gaussian_sym_kl(double mu1, double mu2, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
  const double d = mu1 - mu2;
  return d * d / (2.0 * sigma * sigma);
}

double gaussian_tv(double mu1, double mu2, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
  return std::erf(std::abs(mu1 - mu2) / (2.0 * sigma * std::numbers::sqrt2));
}

}  // namespace oodsel
