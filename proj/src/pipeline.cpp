#include "oodsel/pipeline.hpp"

#include <algorithm>
#include <set>

#include "oodsel/error.hpp"
#include "oodsel/textio.hpp"

namespace oodsel {

PrunedSelection select_with_pruning(const std::vector<Candidate>& candidates,
                                    const std::function<double(std::size_t)>& variation_of,
                                    const SelectionConfig& cfg, bool score_all) {
  cfg.validate();
  if (candidates.empty()) throw InvalidInput("selection needs at least one model");
  std::set<std::string> ids;
  double best_acc = 0.0;
  for (const auto& c : candidates) {
    if (!ids.insert(c.model_id).second) throw InvalidInput("duplicate model_id '" + c.model_id + "'");
    if (!(c.val_accuracy >= 0.0 && c.val_accuracy <= 1.0))
      throw InvalidInput("model '" + c.model_id + "': val_accuracy outside [0, 1]");
    best_acc = std::max(best_acc, c.val_accuracy);
  }

  std::vector<ModelRecord> records(candidates.size());
  std::vector<bool> scored(candidates.size(), false);
  auto score_batch = [&](const std::vector<std::size_t>& which) {
    std::vector<double> v(which.size());
    // Feature-level loops inside variation_of are already parallel; models
    // run one after another.
    for (std::size_t i = 0; i < which.size(); ++i) v[i] = variation_of(which[i]);
    for (std::size_t i = 0; i < which.size(); ++i) {
      auto& r = records[which[i]];
      r.model_id = candidates[which[i]].model_id;
      r.val_accuracy = candidates[which[i]].val_accuracy;
      r.variation = v[i];
      scored[which[i]] = true;
    }
  };

  std::vector<std::size_t> first;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (score_all || candidates[i].val_accuracy >= best_acc - cfg.acc_window) first.push_back(i);
  score_batch(first);

  std::vector<ModelRecord> window;
  for (std::size_t i : first) window.push_back(records[i]);
  const double r0 = cfg.r0 ? *cfg.r0 : estimate_r0(window, cfg.acc_window);

  if (!score_all) {
    double best_score = -1.0;
    for (const auto& m : window) best_score = std::max(best_score, m.val_accuracy - r0 * m.variation);
    std::vector<std::size_t> second;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (!scored[i] && candidates[i].val_accuracy > best_score) second.push_back(i);
    score_batch(second);
  }

  PrunedSelection out;
  std::vector<ModelRecord> done;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (scored[i])
      done.push_back(records[i]);
    else
      out.unscored.push_back(candidates[i]);
  }
  SelectionConfig fixed = cfg;
  fixed.r0 = r0;
  out.result = select_models(std::move(done), fixed);
  std::sort(out.unscored.begin(), out.unscored.end(), [](const Candidate& a, const Candidate& b) {
    if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
    return a.model_id < b.model_id;
  });
  return out;
}

std::string PrunedSelection::to_csv() const {
  std::string out = result.to_csv();
  for (const auto& c : unscored)
    out += c.model_id + "," + format_double(c.val_accuracy) + ",," + format_double(result.r0_used) + ",,\n";
  return out;
}

PrunedSelection select_from_manifest(const ModelManifest& manifest, const ManifestSelectionOptions& opts) {
  std::vector<Candidate> candidates;
  for (const auto& e : manifest.entries) candidates.push_back({e.model_id, e.val_accuracy});
  auto variation_of = [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    try {
      const auto ds = load_dataset(entry.avail_file);
      std::vector<DomainId> domains = opts.avail_domains;
      if (domains.empty()) domains.assign(ds.domain_ids().begin(), ds.domain_ids().end());
      return model_variation(ds, domains, opts.selection.divergence, opts.density);
    } catch (const InvalidInput& e) {
      throw InvalidInput("model '" + entry.model_id + "': " + e.what());
    } catch (const RuntimeFailure& e) {
      throw RuntimeFailure("model '" + entry.model_id + "': " + e.what());
    }
  };
  return select_with_pruning(candidates, variation_of, opts.selection, opts.score_all);
}

}  // namespace oodsel
