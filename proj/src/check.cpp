#include "oodsel/check.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "oodsel/density.hpp"
#include "oodsel/divergence.hpp"
#include "oodsel/error.hpp"
#include "oodsel/expansion.hpp"
#include "oodsel/metrics.hpp"
#include "oodsel/normal.hpp"
#include "oodsel/parallel.hpp"
#include "oodsel/pipeline.hpp"
#include "oodsel/selection.hpp"
#include "oodsel/synthetic.hpp"
#include "oodsel/textio.hpp"

namespace oodsel {
namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string num(double v) { return fmt("%.4f", v); }

bool within_rel(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Criterion 1: KDE divergences between two unit-variance Gaussians one apart.
CheckResult divergence_oracles(std::uint64_t seed) {
  CheckResult r{1, "divergence oracles", false, "", 0.0};
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<double> a(20000), b(20000);
  for (auto& x : a) x = gauss(rng);
  for (auto& x : b) x = 1.0 + gauss(rng);
  const auto p = estimate_density(a);
  const auto q = estimate_density(b);
  const double tv = divergence(p, q, DivergenceKind::total_variation());
  const double kl = divergence(p, q, DivergenceKind::symmetric_kl());
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const double tv_target = 2.0 * normal::cdf(0.5) - 1.0;
  const double kl_target = gaussian_sym_kl(0.0, 1.0, 1.0);
  const bool tv_ok = std::abs(tv - tv_target) <= 0.02;
  const bool kl_ok = within_rel(kl, kl_target, 0.10);
  const bool time_ok = seconds < 2.0;
  r.passed = tv_ok && kl_ok && time_ok;
  r.detail = "TV " + num(tv) + " vs " + num(tv_target) + " (+-0.02), symKL " + num(kl) + " vs " + num(kl_target) +
             " (+-10%), " + fmt("%.2f", seconds) + " s (< 2 s)";
  return r;
}

// Criterion 2: projected symKL variation along the diagonal of the lemma family.
CheckResult lemma_variation(std::uint64_t seed) {
  CheckResult r{2, "Gaussian-lemma variation", false, "", 0.0};
  const auto start = Clock::now();
  GaussianLemmaSpec spec;
  spec.t = 0.5;
  spec.k = 4.0;
  spec.n_per_domain = 50000;
  spec.seed = seed;
  const auto ds = gen_gaussian_lemma(spec);
  const FeatureRef diag = Direction::from({1.0, 1.0});
  const auto kind = DivergenceKind::symmetric_kl();
  const auto avail = GaussianLemmaSpec::avail_domains();
  const auto all = GaussianLemmaSpec::all_domains();
  // One density set serves both domain sets.
  const auto values = feature_values(ds, diag);
  const ConditionalDensities dens(ds, values, DensityConfig{});
  const double v_avail = dens.variation(avail, kind);
  const double v_all = dens.variation(all, kind);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const auto oracle = lemma_symkl_variation(spec, {1.0, 1.0});
  const double ratio = v_all / v_avail;
  r.passed = within_rel(v_avail, oracle.avail, 0.15) && within_rel(v_all, oracle.all, 0.15) &&
             within_rel(ratio, spec.k, 0.20) && seconds < 30.0;
  r.detail = "avail " + num(v_avail) + " vs " + num(oracle.avail) + ", all " + num(v_all) + " vs " +
             num(oracle.all) + " (+-15%), ratio " + num(ratio) + " vs 4 (+-20%), " + fmt("%.2f", seconds) +
             " s (< 30 s)";
  return r;
}

// Criterion 3: err >= C1 s(V^sup) over nine mixing angles, and Monte Carlo
// agreement of the closed-form err.
CheckResult lower_bound(std::uint64_t seed) {
  CheckResult r{3, "lower-bound inequality", false, "", 0.0};
  GaussianLemmaSpec spec;
  spec.t = 0.5;
  spec.k = 4.0;
  spec.n_per_domain = 200000;
  spec.seed = seed;
  const auto ds = gen_gaussian_lemma(spec);
  bool bound_ok = true;
  double worst_gap = 1e300;
  double worst_mc = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double w2sq = 0.05 * i;
    const std::array<double, 2> w{std::sqrt(1.0 - w2sq), std::sqrt(w2sq)};
    const auto eval = eval_lemma_classifier(spec, w, false);
    worst_gap = std::min(worst_gap, eval.err - eval.c1_bound);
    if (!(eval.err >= eval.c1_bound)) bound_ok = false;
    const auto mc = lemma_classifier_monte_carlo(ds, w);
    worst_mc = std::max(worst_mc, std::abs(mc.err - eval.err));
  }
  r.passed = bound_ok && worst_mc <= 0.005;
  r.detail = "min(err - c1_bound) over 9 angles " + fmt("%.5f", worst_gap) + " (>= 0), max |MC err - closed form| " +
             fmt("%.5f", worst_mc) + " (<= 0.005)";
  return r;
}

// Criterion 4: Colored MNIST color-feature expansion slope and shape invariance.
CheckResult colored_mnist_slope(std::uint64_t seed) {
  CheckResult r{4, "Colored MNIST expansion slope", false, "", 0.0};
  ColoredMnistSpec spec;
  spec.n_per_domain = 50000;
  spec.seed = seed;
  const auto ds = gen_colored_mnist(spec);
  const auto split = DomainSplit::make(spec.avail_domains(), spec.all_domains());
  const auto cloud = cloud_from_dataset(ds, split, DivergenceKind::total_variation());
  const auto& shape = cloud.points[0];
  const auto& color = cloud.points[1];
  const double slope = color.v_all / color.v_avail;
  const double target = colored_mnist_expansion_slope(spec);
  r.passed = within_rel(slope, target, 0.10) && shape.v_avail <= 0.05 && shape.v_all <= 0.05;
  r.detail = "color V_all/V_avail " + num(color.v_all) + "/" + num(color.v_avail) + " = " + num(slope) + " vs " +
             num(target) + " (+-10%), shape V " + num(shape.v_avail) + " avail, " + num(shape.v_all) +
             " all (<= 0.05)";
  return r;
}

// Criterion 5: the strict trap hides its shift from every coordinate.
CheckResult projection_necessity(std::uint64_t seed) {
  CheckResult r{5, "projection necessity", false, "", 0.0};
  TrapSpec spec;
  spec.correlation = 0.9;
  spec.n_per_domain = 50000;
  spec.seed = seed;
  const auto ds = gen_trap(spec);
  const std::vector<DomainId> domains{1, 2};
  const auto kind = DivergenceKind::total_variation();
  ProjectionOptions opts;
  opts.n_directions = 256;
  opts.seed = 7;
  const auto proj = projected_metrics(ds, domains, kind, opts);
  double coord = 0.0;
  for (std::size_t j = 0; j < proj.evaluations.size(); ++j)
    if (proj.evaluations[j].axis) coord = std::max(coord, proj.evaluations[j].variation);
  const double oracle = trap_projection_tv(spec.correlation);
  r.passed = coord <= 0.02 && proj.v_sup >= 0.5;
  r.detail = "max coordinate TV variation " + num(coord) + " (<= 0.02), v_sup " + num(proj.v_sup) +
             " (>= 0.5; closed form " + num(oracle) + ")";
  return r;
}

// Criterion 6: selection on the Colored MNIST model zoo.
CheckResult zoo_selection(std::uint64_t seed) {
  CheckResult r{6, "selection behavior", false, "", 0.0};
  ZooSpec spec;
  spec.seed = seed;
  const auto zoo = build_colored_mnist_zoo(spec);
  std::vector<DomainId> avail;
  for (std::size_t i = 0; i < spec.e_avail.size(); ++i) avail.push_back(static_cast<DomainId>(i));
  const auto kind = DivergenceKind::total_variation();
  std::vector<ModelRecord> records;
  std::vector<double> val, ood;
  for (const auto& m : zoo) {
    records.push_back({m.model_id, m.val_accuracy, model_variation(m.avail_features, avail, kind), 0.0});
    val.push_back(m.val_accuracy);
    ood.push_back(m.ood_accuracy);
  }
  auto find = [&](const std::string& id) {
    return *std::find_if(zoo.begin(), zoo.end(), [&](const ZooModel& m) { return m.model_id == id; });
  };
  SelectionConfig cfg;
  const auto chosen = select_models(records, cfg);
  cfg.r0 = 0.0;
  const auto baseline = select_models(records, cfg);
  const auto& pick = find(chosen.ranked.front().model_id);
  const auto& base = find(baseline.ranked.front().model_id);
  const double corr = pearson(val, ood);
  const bool invariant_first = pick.angle_deg < 45.0;
  r.passed = invariant_first && pick.ood_accuracy > base.ood_accuracy && corr < 0.0 && zoo.size() >= 6;
  r.detail = std::to_string(zoo.size()) + " models, r0 " + num(chosen.r0_used) + ", pick " + pick.model_id +
             " (OOD " + num(pick.ood_accuracy) + ") vs accuracy-only pick " + base.model_id + " (OOD " +
             num(base.ood_accuracy) + "), corr(val, OOD) " + num(corr) + " (< 0)";
  return r;
}

// Criterion 7: learnability verdicts and envelope properties.
CheckResult expansion_verdicts(std::uint64_t seed) {
  CheckResult r{7, "expansion verdicts", false, "", 0.0};
  FeatureCloud cloud;
  for (int i = 1; i <= 20; ++i) {
    const double x = 0.02 * i;
    cloud.points.push_back({x, 1.5 * x, 0.4 + 0.01 * i, "f" + std::to_string(i)});
  }
  cloud.points.push_back({0.01, 0.6, 0.0, "trap"});
  const auto v0 = check_learnability(cloud, 0.0);
  const auto v15 = check_learnability(cloud, 0.15);
  const bool verdict_ok = !v0.learnable && v15.learnable;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 120);
  const std::vector<double> deltas{0.0, 0.05, 0.1, 0.15, 0.3, 0.6};
  int failures = 0;
  for (int c = 0; c < 100; ++c) {
    FeatureCloud rc;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      const double va = unif(rng) < 0.1 ? 0.0 : unif(rng) * 0.5;
      rc.points.push_back({va, unif(rng), unif(rng) * 0.7, "p" + std::to_string(i)});
    }
    std::vector<ExpansionEstimate> ests;
    for (double d : deltas) {
      try {
        ests.push_back(estimate_expansion(rc, d, 20));
      } catch (const InvalidInput&) {
        break;  // every larger delta filters out at least as much
      }
    }
    bool ok = !ests.empty();
    for (std::size_t k = 0; k < ests.size() && ok; ++k) {
      const auto& e = ests[k];
      for (std::size_t b = 0; b < e.envelope.size(); ++b) {
        if (e.envelope[b] < e.bin_edges[b + 1]) ok = false;
        if (b > 0 && e.envelope[b] < e.envelope[b - 1]) ok = false;
        if (k > 0 && e.envelope[b] > ests[k - 1].envelope[b]) ok = false;
      }
    }
    if (!ok) ++failures;
  }
  r.passed = verdict_ok && failures == 0;
  r.detail = std::string("delta 0 ") + (v0.learnable ? "learnable" : "unlearnable") + ", delta 0.15 " +
             (v15.learnable ? "learnable" : "unlearnable") + ", property failures " + std::to_string(failures) +
             "/100";
  return r;
}

FeatureDataset perf_dataset(std::size_t d, std::size_t n, unsigned k, unsigned n_domains, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> gauss;
  std::uniform_int_distribution<unsigned> label(1, k);
  std::vector<float> feats(n * d);
  std::vector<Label> labels(n);
  std::vector<DomainId> domains(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<Label>(label(rng));
    domains[i] = static_cast<DomainId>(i * n_domains / n);
    for (std::size_t j = 0; j < d; ++j) {
      const float shift = 0.25f * static_cast<float>((labels[i] + j) % 3) +
                          0.1f * static_cast<float>(domains[i] * (j % 2));
      feats[i * d + j] = shift + gauss(rng);
    }
  }
  return FeatureDataset(d, k, std::move(feats), std::move(labels), std::move(domains));
}

FeatureDataset take_columns(const FeatureDataset& ds, std::size_t from, std::size_t count) {
  std::vector<float> feats;
  feats.reserve(ds.n_samples() * count);
  for (std::size_t i = 0; i < ds.n_samples(); ++i)
    for (std::size_t j = from; j < from + count; ++j) feats.push_back(ds.feature(i, j));
  return FeatureDataset(count, ds.n_classes(), std::move(feats),
                        std::vector<Label>(ds.labels().begin(), ds.labels().end()),
                        std::vector<DomainId>(ds.domains().begin(), ds.domains().end()));
}

std::vector<std::string> all_csv_outputs(const FeatureDataset& ds) {
  const auto kind = DivergenceKind::total_variation();
  const std::vector<DomainId> avail{0, 1};
  const std::vector<DomainId> all{0, 1, 2};
  std::vector<std::string> out;
  out.push_back(variation_report(ds, all, "all", kind).to_csv());
  ProjectionOptions opts;
  opts.n_directions = 32;
  out.push_back(projected_metrics(ds, avail, kind, opts).to_csv());
  const auto cloud = cloud_from_dataset(ds, DomainSplit::make(avail, all), kind);
  out.push_back(cloud.to_csv());
  out.push_back(estimate_expansion(cloud, 0.0).to_csv());
  std::vector<Candidate> cands;
  std::vector<FeatureDataset> models;
  for (std::size_t m = 0; m < 6; ++m) {
    models.push_back(take_columns(ds, 4 * m, 4));
    cands.push_back({"m" + std::to_string(m), 0.6 + 0.05 * static_cast<double>(m % 3)});
  }
  SelectionConfig cfg;
  cfg.acc_window = 0.2;
  out.push_back(select_with_pruning(
                    cands, [&](std::size_t i) { return model_variation(models[i], avail, kind); }, cfg)
                    .to_csv());
  return out;
}

// Criterion 8: thread-count independence of every CSV, and desk-scale runtime.
CheckResult determinism_performance(std::uint64_t seed) {
  CheckResult r{8, "determinism and performance", false, "", 0.0};
  const int saved = num_threads();
  const auto small = perf_dataset(24, 3000, 3, 3, seed);
  std::vector<int> counts{1, 4, hardware_threads()};
  std::vector<std::vector<std::string>> outputs;
  for (int t : counts) {
    set_num_threads(t);
    outputs.push_back(all_csv_outputs(small));
  }
  set_num_threads(saved);
  const bool identical = outputs[0] == outputs[1] && outputs[0] == outputs[2];

  const auto big = perf_dataset(2048, 10000, 7, 3, seed + 1);
  const std::vector<DomainId> all{0, 1, 2};
  const auto start = Clock::now();
  const auto report = variation_report(big, all, "all", DivergenceKind::total_variation());
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  r.passed = identical && seconds < 60.0 && report.rows.size() == 2048;
  r.detail = std::string("CSV outputs ") + (identical ? "identical" : "DIFFER") + " across threads {1, 4, " +
             std::to_string(hardware_threads()) + "}; d=2048 K=7 n=10000 TV variation in " + fmt("%.2f", seconds) +
             " s on " + std::to_string(num_threads()) + " thread(s) (< 60 s)";
  return r;
}

}  // namespace

std::string CheckResult::line() const {
  return std::string(passed ? "PASS" : "FAIL") + " " + std::to_string(id) + " " + name + ": " + detail + " (" +
         fmt("%.2f", seconds) + " s)";
}

std::vector<CheckResult> run_paper_suite(const CheckOptions& opts) {
  using Fn = CheckResult (*)(std::uint64_t);
  const Fn criteria[] = {divergence_oracles, lemma_variation, lower_bound,        colored_mnist_slope,
                         projection_necessity, zoo_selection, expansion_verdicts, determinism_performance};
  std::vector<CheckResult> results;
  for (int id = 1; id <= 8; ++id) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) continue;
    const auto start = Clock::now();
    CheckResult res;
    try {
      res = criteria[id - 1](opts.seed);
    } catch (const std::exception& e) {
      res.id = id;
      res.name = "criterion " + std::to_string(id);
      res.passed = false;
      res.detail = std::string("error: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (opts.on_result) opts.on_result(res);
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace oodsel
