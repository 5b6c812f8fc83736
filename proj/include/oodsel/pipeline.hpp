#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oodsel/dataio.hpp"
#include "oodsel/metrics.hpp"
#include "oodsel/selection.hpp"

namespace oodsel {

struct Candidate {
  std::string model_id;
  double val_accuracy = 0.0;
};

// Selection where variation is computed lazily. Models that provably cannot
// win are left unscored: V >= 0 and r0 >= 0 give score <= val_accuracy, so a
// model whose accuracy does not exceed the best score found among the
// accuracy window is never the argmax.
struct PrunedSelection {
  SelectionResult result;           // scored models, ranked
  std::vector<Candidate> unscored;  // by accuracy, then id

  // SelectionResult columns; unscored rows leave variation, score and rank empty.
  std::string to_csv() const;
};

PrunedSelection select_with_pruning(const std::vector<Candidate>& candidates,
                                    const std::function<double(std::size_t)>& variation_of,
                                    const SelectionConfig& cfg, bool score_all = false);

struct ManifestSelectionOptions {
  SelectionConfig selection;
  DensityConfig density;
  // Domains used for V_f; empty means every domain in each model's file.
  std::vector<DomainId> avail_domains;
  bool score_all = false;
};

PrunedSelection select_from_manifest(const ModelManifest& manifest, const ManifestSelectionOptions& opts);

}  // namespace oodsel
