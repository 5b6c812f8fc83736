#include "oodsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oodsel/error.hpp"
#include "oodsel/parallel.hpp"
#include "oodsel/textio.hpp"

namespace oodsel {

Direction Direction::from(std::vector<double> coeffs) {
  if (coeffs.empty()) throw InvalidInput("direction needs at least one coefficient");
  double ss = 0.0;
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw InvalidInput("direction has a non-finite coefficient");
    ss += c * c;
  }
  if (!(ss > 0.0)) throw InvalidInput("direction must be nonzero");
  const double norm = std::sqrt(ss);
  for (double& c : coeffs) c /= norm;
  return Direction(std::move(coeffs));
}

Direction Direction::axis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw InvalidInput("axis index out of range");
  std::vector<double> c(dim, 0.0);
  c[index] = 1.0;
  return Direction(std::move(c));
}

std::vector<double> feature_values(const FeatureDataset& ds, const FeatureRef& feature) {
  if (const auto* j = std::get_if<std::size_t>(&feature)) return ds.column(*j);
  return ds.project(std::get<Direction>(feature).coefficients());
}

std::vector<DomainId> check_domains(const FeatureDataset& ds, std::span<const DomainId> domains) {
  std::vector<DomainId> out(domains.begin(), domains.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  const auto ids = ds.domain_ids();
  for (DomainId e : out)
    if (!std::binary_search(ids.begin(), ids.end(), e))
      throw InvalidInput("domain " + std::to_string(e) + " is not present in the dataset");
  return out;
}

ConditionalDensities::ConditionalDensities(const FeatureDataset& ds, std::span<const double> values,
                                           const DensityConfig& cfg)
    : domain_ids_(ds.domain_ids().begin(), ds.domain_ids().end()), n_classes_(ds.n_classes()) {
  cfg.grid.validate();
  if (values.size() != ds.n_samples()) throw InvalidInput("feature values do not match the dataset size");
  const std::size_t n_cells = domain_ids_.size() * n_classes_;
  std::vector<std::vector<double>> samples(n_cells);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(domain_ids_.begin(), domain_ids_.end(), ds.domains()[i]) - domain_ids_.begin());
    samples[index(pos, ds.labels()[i])].push_back(values[i]);
  }

  counts_.resize(n_cells);
  std::vector<double> bandwidths(n_cells, 0.0);
  lo_ = std::numeric_limits<double>::infinity();
  hi_ = -lo_;
  for (std::size_t c = 0; c < n_cells; ++c) {
    counts_[c] = samples[c].size();
    if (counts_[c] < 2) continue;
    double h = select_bandwidth(samples[c], cfg.bandwidth);
    if (!(h > 0.0)) {
      h = fallback_bandwidth(samples[c]);
      warn("zero spread in cell (domain " + std::to_string(domain_ids_[c / n_classes_]) + ", label " +
           std::to_string(c % n_classes_ + 1) + "); fallback bandwidth " + format_double(h));
    }
    bandwidths[c] = h;
    const auto [mn, mx] = std::minmax_element(samples[c].begin(), samples[c].end());
    lo_ = std::min(lo_, *mn - cfg.grid.padding * h);
    hi_ = std::max(hi_, *mx + cfg.grid.padding * h);
  }
  points_ = cfg.grid.points;
  cells_.resize(n_cells);
  if (!(lo_ < hi_)) return;  // no usable cell; every metric request will fail
  step_ = (hi_ - lo_) / static_cast<double>(points_ - 1);
  for (std::size_t c = 0; c < n_cells; ++c) {
    if (counts_[c] < 2) continue;
    const double h = std::max(bandwidths[c], step_);
    auto& mass = cells_[c];
    mass.assign(points_, 0.0);
    accumulate_kernels(samples[c], h, lo_, step_, mass);
    const double total = trapezoid(mass, step_);
    if (!(total > 0.0)) throw RuntimeFailure("cell density has zero mass on the feature grid");
    for (double& v : mass) v /= total;
  }
}

std::size_t ConditionalDensities::domain_pos(DomainId domain) const {
  const auto it = std::lower_bound(domain_ids_.begin(), domain_ids_.end(), domain);
  if (it == domain_ids_.end() || *it != domain)
    throw InvalidInput("domain " + std::to_string(domain) + " is not present in the dataset");
  return static_cast<std::size_t>(it - domain_ids_.begin());
}

std::span<const double> ConditionalDensities::cell(DomainId domain, Label label) const {
  if (label < 1 || label > n_classes_) throw InvalidInput("label out of range");
  return cells_[index(domain_pos(domain), label)];
}

std::span<const double> ConditionalDensities::require(std::size_t pos, Label label) const {
  const auto c = index(pos, label);
  if (counts_[c] < 2)
    throw InvalidInput("cell (domain " + std::to_string(domain_ids_[pos]) + ", label " + std::to_string(label) +
                       ") has " + std::to_string(counts_[c]) + " samples; at least 2 are required");
  return cells_[c];
}

double ConditionalDensities::variation(std::span<const DomainId> domains, const DivergenceKind& kind) const {
  std::vector<std::size_t> pos;
  for (DomainId e : domains) pos.push_back(domain_pos(e));
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  if (pos.size() < 2) return 0.0;
  double best = 0.0;
  for (Label y = 1; y <= n_classes_; ++y) {
    for (std::size_t a = 0; a < pos.size(); ++a) {
      const auto p = require(pos[a], y);
      for (std::size_t b = a + 1; b < pos.size(); ++b)
        best = std::max(best, divergence_on_grid(p, require(pos[b], y), step_, kind));
    }
  }
  return best;
}

double ConditionalDensities::informativeness(std::span<const DomainId> domains, const DivergenceKind& kind) const {
  std::vector<std::size_t> pos;
  for (DomainId e : domains) pos.push_back(domain_pos(e));
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  if (pos.empty()) throw InvalidInput("informativeness needs at least one domain");
  double total = 0.0;
  std::size_t pairs = 0;
  for (Label y = 1; y <= n_classes_; ++y) {
    for (Label y2 = y + 1; y2 <= n_classes_; ++y2) {
      double best = std::numeric_limits<double>::infinity();
      for (auto e : pos) best = std::min(best, divergence_on_grid(require(e, y), require(e, y2), step_, kind));
      total += best;
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

namespace {

void warn_single_domain(std::span<const DomainId> domains) {
  if (domains.size() < 2)
    warn("fewer than 2 domains selected; variation is 0 by definition");
}

}  // namespace

double feature_variation(const FeatureDataset& ds, const FeatureRef& feature, std::span<const DomainId> domains,
                         const DivergenceKind& kind, const DensityConfig& cfg) {
  kind.validate();
  const auto sel = check_domains(ds, domains);
  if (sel.size() < 2) {
    warn_single_domain(sel);
    return 0.0;
  }
  const auto values = feature_values(ds, feature);
  return ConditionalDensities(ds, values, cfg).variation(sel, kind);
}

double feature_informativeness(const FeatureDataset& ds, const FeatureRef& feature,
                               std::span<const DomainId> domains, const DivergenceKind& kind,
                               const DensityConfig& cfg) {
  kind.validate();
  const auto sel = check_domains(ds, domains);
  const auto values = feature_values(ds, feature);
  return ConditionalDensities(ds, values, cfg).informativeness(sel, kind);
}

std::string VariationReport::to_csv() const {
  std::string out = "feature_index,variation,informativeness,divergence,domain_set\n";
  for (const auto& r : rows)
    out += std::to_string(r.feature_index) + "," + format_double(r.variation) + "," +
           format_double(r.informativeness) + "," + divergence + "," + domain_set + "\n";
  return out;
}

VariationReport variation_report(const FeatureDataset& ds, std::span<const DomainId> domains,
                                 const std::string& domain_set_label, const DivergenceKind& kind,
                                 const DensityConfig& cfg) {
  kind.validate();
  const auto sel = check_domains(ds, domains);
  warn_single_domain(sel);
  VariationReport report{kind.name(), domain_set_label, std::vector<FeatureMetrics>(ds.dim())};
  parallel_for(ds.dim(), [&](std::size_t j) {
    const auto values = ds.column(j);
    const ConditionalDensities dens(ds, values, cfg);
    report.rows[j] = {j, dens.variation(sel, kind), dens.informativeness(sel, kind)};
  });
  return report;
}

double model_variation(const FeatureDataset& ds, std::span<const DomainId> domains, const DivergenceKind& kind,
                       const DensityConfig& cfg) {
  kind.validate();
  const auto sel = check_domains(ds, domains);
  if (sel.size() < 2) {
    warn_single_domain(sel);
    return 0.0;
  }
  std::vector<double> per_feature(ds.dim());
  parallel_for(ds.dim(), [&](std::size_t j) {
    const auto values = ds.column(j);
    per_feature[j] = ConditionalDensities(ds, values, cfg).variation(sel, kind);
  });
  double sum = 0.0;
  for (double v : per_feature) sum += v;
  return sum / static_cast<double>(ds.dim());
}

std::vector<Direction> random_directions(std::size_t dim, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Direction> out;
  out.reserve(count);
  std::vector<double> v(dim);
  while (out.size() < count) {
    double ss = 0.0;
    for (double& c : v) {
      c = gauss(rng);
      ss += c * c;
    }
    if (ss > 1e-300) out.push_back(Direction::from(v));
  }
  return out;
}

std::string ProjectedMetrics::to_csv() const {
  std::string out = "direction,source,variation,informativeness\n";
  for (std::size_t i = 0; i < evaluations.size(); ++i)
    out += std::to_string(i) + "," + (evaluations[i].axis ? "axis" : "random") + "," +
           format_double(evaluations[i].variation) + "," + format_double(evaluations[i].informativeness) + "\n";
  return out;
}

ProjectedMetrics projected_metrics(const FeatureDataset& ds, std::span<const DomainId> domains,
                                   const DivergenceKind& kind, const ProjectionOptions& opts,
                                   const DensityConfig& cfg) {
  kind.validate();
  if (opts.n_directions < 1) throw InvalidInput("projected metrics need n_directions >= 1");
  const auto sel = check_domains(ds, domains);
  warn_single_domain(sel);
  const std::size_t d = ds.dim();

  std::vector<Direction> dirs;
  dirs.reserve(d + opts.n_directions);
  for (std::size_t j = 0; j < d; ++j) dirs.push_back(Direction::axis(d, j));
  for (auto& r : random_directions(d, opts.n_directions, opts.seed)) dirs.push_back(std::move(r));

  std::vector<DirectionEvaluation> evals(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t i) {
    const auto values = ds.project(dirs[i].coefficients());
    const ConditionalDensities dens(ds, values, cfg);
    evals[i] = {i < d, dens.variation(sel, kind), dens.informativeness(sel, kind)};
  });

  std::size_t arg_max = 0;
  std::size_t arg_min = 0;
  for (std::size_t i = 1; i < evals.size(); ++i) {
    if (evals[i].variation > evals[arg_max].variation) arg_max = i;
    if (evals[i].informativeness < evals[arg_min].informativeness) arg_min = i;
  }

  ProjectedMetrics out;
  out.v_sup = evals[arg_max].variation;
  out.v_sup_direction = dirs[arg_max];
  out.i_inf = evals[arg_min].informativeness;
  out.i_inf_direction = dirs[arg_min];
  out.n_directions = opts.n_directions;
  out.seed = opts.seed;
  out.evaluations = std::move(evals);

  if (opts.refine_steps > 0 && sel.size() >= 2) {
    auto score = [&](const std::vector<double>& beta) {
      const auto values = ds.project(beta);
      return ConditionalDensities(ds, values, cfg).variation(sel, kind);
    };
    std::vector<double> best(out.v_sup_direction.coefficients().begin(), out.v_sup_direction.coefficients().end());
    double best_v = out.v_sup;
    double eta = 0.1;
    bool improved_this_sweep = false;
    for (std::size_t step = 0; step < opts.refine_steps; ++step) {
      const std::size_t j = step % d;
      for (double sign : {1.0, -1.0}) {
        auto cand = best;
        cand[j] += sign * eta;
        double ss = 0.0;
        for (double c : cand) ss += c * c;
        if (!(ss > 0.0)) continue;
        for (double& c : cand) c /= std::sqrt(ss);
        const double v = score(cand);
        if (v > best_v) {
          best_v = v;
          best = std::move(cand);
          improved_this_sweep = true;
          break;
        }
      }
      if (j + 1 == d) {
        if (!improved_this_sweep) eta *= 0.5;
        improved_this_sweep = false;
      }
    }
    if (best_v > out.v_sup) {
      out.v_sup = best_v;
      out.v_sup_direction = Direction::from(best);
    }
    out.refined = true;
  }
  return out;
}

}  // namespace oodsel
