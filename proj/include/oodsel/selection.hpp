#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oodsel/divergence.hpp"

namespace oodsel {

struct ModelRecord {
  std::string model_id;
  double val_accuracy = 0.0;
  double variation = 0.0;  // V_f, mean per-feature variation on the available domains
  double score = 0.0;      // val_accuracy - r0 * variation, filled by select()
};

struct SelectionConfig {
  std::optional<double> r0;  // empty: estimate from the accuracy window
  double acc_window = 0.1;
  DivergenceKind divergence = DivergenceKind::total_variation();

  void validate() const;
};

// Models with val_accuracy >= max accuracy - acc_window.
std::vector<ModelRecord> accuracy_window(const std::vector<ModelRecord>& models, double acc_window);

// Std(Acc) / Std(V) over the accuracy window, both population standard
// deviations. Throws when fewer than two models fall in the window; returns 0
// with a warning when Std(V) < 1e-12.
double estimate_r0(const std::vector<ModelRecord>& models, double acc_window);

struct SelectionResult {
  double r0_used = 0.0;
  std::vector<ModelRecord> ranked;  // descending score; ties by accuracy, then id

  // Columns: model_id, val_accuracy, variation, r0_used, score, rank.
  std::string to_csv() const;
};

SelectionResult select_models(std::vector<ModelRecord> models, const SelectionConfig& cfg);

}  // namespace oodsel
