#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "oodsel/dataio.hpp"
#include "oodsel/density.hpp"
#include "oodsel/divergence.hpp"

namespace oodsel {

struct DensityConfig {
  BandwidthRule bandwidth = BandwidthRule::silverman();
  GridSpec grid;
};

// Unit-norm coefficient vector over the d features.
class Direction {
 public:
  // Normalizes coeffs; throws on a zero or non-finite vector.
  static Direction from(std::vector<double> coeffs);
  static Direction axis(std::size_t dim, std::size_t index);

  std::span<const double> coefficients() const { return coeffs_; }
  std::size_t dim() const { return coeffs_.size(); }

 private:
  explicit Direction(std::vector<double> c) : coeffs_(std::move(c)) {}
  std::vector<double> coeffs_;
};

// A scalar feature: one coordinate of h, or a projection beta^T h.
using FeatureRef = std::variant<std::size_t, Direction>;

std::vector<double> feature_values(const FeatureDataset& ds, const FeatureRef& feature);

// Class-conditional densities P(phi^e | y) of one scalar feature for every
// (domain, label) cell of a dataset. All cells share a single grid spanning
// every cell of the dataset (not just a selected subset), so metrics over
// different domain sets compare identical density estimates. Cells with fewer
// than two samples are kept empty and rejected only when a metric needs them.
class ConditionalDensities {
 public:
  ConditionalDensities(const FeatureDataset& ds, std::span<const double> values, const DensityConfig& cfg);

  // max over labels y, max over pairs e != e' in domains of rho(P(phi^e|y), P(phi^e'|y)).
  // Returns 0 for fewer than two domains.
  double variation(std::span<const DomainId> domains, const DivergenceKind& kind) const;
  // Mean over unordered label pairs y != y' of min over e of rho(P(phi^e|y), P(phi^e|y')).
  double informativeness(std::span<const DomainId> domains, const DivergenceKind& kind) const;

  double grid_lo() const { return lo_; }
  double grid_hi() const { return hi_; }
  std::size_t grid_points() const { return points_; }
  // Empty span when the cell has fewer than two samples.
  std::span<const double> cell(DomainId domain, Label label) const;

 private:
  std::size_t index(std::size_t domain_pos, Label label) const {
    return domain_pos * n_classes_ + (label - 1);
  }
  std::size_t domain_pos(DomainId domain) const;
  std::span<const double> require(std::size_t domain_pos, Label label) const;

  std::vector<DomainId> domain_ids_;
  unsigned n_classes_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::size_t points_ = 0;
  double step_ = 0.0;
  std::vector<std::vector<double>> cells_;
  std::vector<std::size_t> counts_;
};

double feature_variation(const FeatureDataset& ds, const FeatureRef& feature, std::span<const DomainId> domains,
                         const DivergenceKind& kind, const DensityConfig& cfg = {});

double feature_informativeness(const FeatureDataset& ds, const FeatureRef& feature,
                               std::span<const DomainId> domains, const DivergenceKind& kind,
                               const DensityConfig& cfg = {});

struct FeatureMetrics {
  std::size_t feature_index = 0;
  double variation = 0.0;
  double informativeness = 0.0;
};

// Per-coordinate variation and informativeness for all d features, computed
// in parallel.
struct VariationReport {
  std::string divergence;
  std::string domain_set;
  std::vector<FeatureMetrics> rows;

  // Columns: feature_index, variation, informativeness, divergence, domain_set.
  std::string to_csv() const;
};

VariationReport variation_report(const FeatureDataset& ds, std::span<const DomainId> domains,
                                 const std::string& domain_set_label, const DivergenceKind& kind,
                                 const DensityConfig& cfg = {});

// Mean over the d coordinates of feature_variation: the V_f selection statistic.
double model_variation(const FeatureDataset& ds, std::span<const DomainId> domains, const DivergenceKind& kind,
                       const DensityConfig& cfg = {});

struct DirectionEvaluation {
  bool axis = false;
  double variation = 0.0;
  double informativeness = 0.0;
};

// Monte Carlo estimates of sup_beta V(beta^T h) and inf_beta I(beta^T h):
// evaluated on the d coordinate axes followed by n_directions seeded random
// unit directions. v_sup is therefore a lower bound of the true supremum and
// i_inf an upper bound of the true infimum.
struct ProjectedMetrics {
  double v_sup = 0.0;
  Direction v_sup_direction = Direction::axis(1, 0);
  double i_inf = 0.0;
  Direction i_inf_direction = Direction::axis(1, 0);
  std::size_t n_directions = 0;
  std::uint64_t seed = 0;
  bool refined = false;
  std::vector<DirectionEvaluation> evaluations;

  // Columns: direction, source, variation, informativeness.
  std::string to_csv() const;
};

struct ProjectionOptions {
  std::size_t n_directions = 256;
  std::uint64_t seed = 7;
  // Coordinate-wise hill-climb steps from the best sampled direction (0 = off).
  std::size_t refine_steps = 0;
};

ProjectedMetrics projected_metrics(const FeatureDataset& ds, std::span<const DomainId> domains,
                                   const DivergenceKind& kind, const ProjectionOptions& opts,
                                   const DensityConfig& cfg = {});

// Seeded random unit directions, drawn as normalized standard Gaussian vectors.
std::vector<Direction> random_directions(std::size_t dim, std::size_t count, std::uint64_t seed);

// Sorted, deduplicated copy; throws if any id is absent from the dataset.
std::vector<DomainId> check_domains(const FeatureDataset& ds, std::span<const DomainId> domains);

}  // namespace oodsel
