#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "oodsel/metrics.hpp"

namespace oodsel {

struct CloudPoint {
  double v_avail = 0.0;
  double v_all = 0.0;
  double informativeness = 0.0;  // measured on the available domains
  std::string feature_tag;
};

// One point per feature in the (V_avail, V_all) plane.
struct FeatureCloud {
  std::vector<CloudPoint> points;

  void validate() const;
  // Columns: feature_tag, v_avail, v_all, informativeness.
  std::string to_csv() const;
  static FeatureCloud from_csv(const std::string& text);
};

struct TaggedMetrics {
  std::string tag;
  double variation = 0.0;
  double informativeness = 0.0;
};

// Matches the two metric sets by tag; informativeness comes from `avail`.
FeatureCloud build_cloud(const std::vector<TaggedMetrics>& avail, const std::vector<TaggedMetrics>& all);

// Per-feature V on the available and on all domains, and I on the available
// domains, from a dataset holding every domain. Tags are feature indices.
FeatureCloud cloud_from_dataset(const FeatureDataset& ds, const DomainSplit& split, const DivergenceKind& kind,
                                const DensityConfig& cfg = {});

// Smallest piecewise-constant, nondecreasing function with s(x) >= x that
// dominates every cloud point with informativeness >= delta.
struct ExpansionEstimate {
  double delta = 0.0;
  std::vector<double> bin_edges;  // n_bins + 1 edges over [0, max v_avail of the whole cloud]
  std::vector<double> envelope;   // value on each bin (right-closed)
  std::size_t n_points_used = 0;

  // s(x) for x > 0; x beyond the last edge uses the last bin.
  double at(double x) const;
  // Columns: bin_lo, bin_hi, envelope.
  std::string to_csv() const;
};

// Bins span [0, max v_avail over the unfiltered cloud] so that estimates at
// different deltas share edges. Points with v_avail == 0 fall in the first bin.
ExpansionEstimate estimate_expansion(const FeatureCloud& cloud, double delta, std::size_t n_bins = 40);

struct LearnabilityVerdict {
  double delta = 0.0;
  bool learnable = true;
  double envelope_at_origin = 0.0;  // max v_all over filtered points with v_avail <= x0
  std::vector<std::string> witnesses;  // up to 10 points with v_all > y0, largest first
  double x0 = 0.05;
  double y0 = 0.2;
};

// Finite-window reading of s(0+) = 0: a heuristic verdict over the sampled
// features, not a certificate over the whole feature space.
LearnabilityVerdict check_learnability(const FeatureCloud& cloud, double delta, double x0 = 0.05, double y0 = 0.2);

// Scatter of (v_avail, v_all) colored by informativeness, with the step
// envelope for each estimate and the dashed identity line.
std::string render_cloud_svg(const FeatureCloud& cloud, const std::vector<ExpansionEstimate>& envelopes,
                             const std::string& title = "");

}  // namespace oodsel
