#include "oodsel/selection.hpp"

#include <algorithm>
#include <cmath>

#include "oodsel/error.hpp"
#include "oodsel/textio.hpp"

namespace oodsel {
namespace {

double population_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

void check_record(const ModelRecord& m) {
  if (!std::isfinite(m.val_accuracy) || m.val_accuracy < 0.0 || m.val_accuracy > 1.0)
    throw InvalidInput("model '" + m.model_id + "': val_accuracy outside [0, 1]");
  if (!std::isfinite(m.variation) || m.variation < 0.0)
    throw InvalidInput("model '" + m.model_id + "': variation must be finite and >= 0");
}

}  // namespace

void SelectionConfig::validate() const {
  if (!(acc_window > 0.0 && acc_window <= 1.0)) throw InvalidInput("acc_window must lie in (0, 1]");
  if (r0 && (!std::isfinite(*r0) || *r0 < 0.0)) throw InvalidInput("r0 must be finite and >= 0");
  divergence.validate();
}

std::vector<ModelRecord> accuracy_window(const std::vector<ModelRecord>& models, double acc_window) {
  if (models.empty()) return {};
  double best = 0.0;
  for (const auto& m : models) best = std::max(best, m.val_accuracy);
  std::vector<ModelRecord> out;
  for (const auto& m : models)
    if (m.val_accuracy >= best - acc_window) out.push_back(m);
  return out;
}

double estimate_r0(const std::vector<ModelRecord>& models, double acc_window) {
  if (!(acc_window > 0.0 && acc_window <= 1.0)) throw InvalidInput("acc_window must lie in (0, 1]");
  for (const auto& m : models) check_record(m);
  const auto window = accuracy_window(models, acc_window);
  if (window.size() < 2)
    throw InvalidInput("window too narrow: " + std::to_string(window.size()) +
                       " model(s) within " + format_double(acc_window) + " of the best accuracy; need 2");
  std::vector<double> acc;
  std::vector<double> var;
  for (const auto& m : window) {
    acc.push_back(m.val_accuracy);
    var.push_back(m.variation);
  }
  const double sv = population_std(var);
  if (sv < 1e-12) {
    warn("degenerate variation spread in the accuracy window; r0 = 0 (pure accuracy selection)");
    return 0.0;
  }
  return population_std(acc) / sv;
}

SelectionResult select_models(std::vector<ModelRecord> models, const SelectionConfig& cfg) {
  cfg.validate();
  if (models.empty()) throw InvalidInput("selection needs at least one model");
  for (const auto& m : models) check_record(m);
  SelectionResult result;
  result.r0_used = cfg.r0 ? *cfg.r0 : estimate_r0(models, cfg.acc_window);
  for (auto& m : models) m.score = m.val_accuracy - result.r0_used * m.variation;
  std::sort(models.begin(), models.end(), [](const ModelRecord& a, const ModelRecord& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
    return a.model_id < b.model_id;
  });
  result.ranked = std::move(models);
  return result;
}

std::string SelectionResult::to_csv() const {
  std::string out = "model_id,val_accuracy,variation,r0_used,score,rank\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& m = ranked[i];
    out += m.model_id + "," + format_double(m.val_accuracy) + "," + format_double(m.variation) + "," +
           format_double(r0_used) + "," + format_double(m.score) + "," + std::to_string(i + 1) + "\n";
  }
  return out;
}

}  // namespace oodsel
