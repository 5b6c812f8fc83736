#include "oodsel/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "oodsel/error.hpp"
#include "oodsel/normal.hpp"
#include "oodsel/parallel.hpp"

namespace oodsel {
namespace {

std::mt19937_64 block_rng(std::uint64_t seed, std::uint64_t block, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

// Binary labels in {0, 1}: Bernoulli(1/2) draws, or an exact half split in
// random order.
std::vector<int> binary_labels(std::size_t n, bool exact, std::mt19937_64& rng) {
  std::vector<int> y(n);
  if (exact) {
    for (std::size_t i = 0; i < n; ++i) y[i] = i < n / 2 ? 0 : 1;
    std::shuffle(y.begin(), y.end(), rng);
  } else {
    std::bernoulli_distribution coin(0.5);
    for (auto& v : y) v = coin(rng) ? 1 : 0;
  }
  return y;
}

struct Block {
  std::vector<float> features;
  std::vector<Label> labels;
};

FeatureDataset assemble(std::size_t dim, const std::vector<Block>& blocks, const std::vector<DomainId>& ids) {
  std::vector<float> features;
  std::vector<Label> labels;
  std::vector<DomainId> domains;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    features.insert(features.end(), blocks[b].features.begin(), blocks[b].features.end());
    labels.insert(labels.end(), blocks[b].labels.begin(), blocks[b].labels.end());
    domains.insert(domains.end(), blocks[b].labels.size(), ids[b]);
  }
  return FeatureDataset(dim, 2, std::move(features), std::move(labels), std::move(domains));
}

void check_unit_interval(const std::vector<double>& es, const char* what) {
  for (double e : es)
    if (!(e >= 0.0 && e <= 1.0)) throw InvalidInput(std::string(what) + " values must lie in [0, 1]");
}

double max_gap(const std::vector<double>& es) {
  const auto [mn, mx] = std::minmax_element(es.begin(), es.end());
  return *mx - *mn;
}

}  // namespace

void ColoredMnistSpec::validate() const {
  if (e_avail.empty() || e_all.empty()) throw InvalidInput("Colored MNIST needs nonempty domain lists");
  check_unit_interval(e_avail, "e_avail");
  check_unit_interval(e_all, "e_all");
  for (double e : e_avail)
    if (std::find(e_all.begin(), e_all.end(), e) == e_all.end())
      throw InvalidInput("every e_avail value must appear in e_all");
  if (e_all.size() > std::numeric_limits<DomainId>::max()) throw InvalidInput("too many domains");
  if (n_per_domain < 1) throw InvalidInput("n_per_domain must be >= 1");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw InvalidInput("flip_prob must lie in [0, 1]");
  if (!(shape_mean > 0.0)) throw InvalidInput("shape_mean must be positive");
  if (!(color_noise > 0.0)) throw InvalidInput("color_noise must be positive");
}

std::vector<DomainId> ColoredMnistSpec::avail_domains() const {
  std::vector<DomainId> out;
  for (double e : e_avail)
    out.push_back(static_cast<DomainId>(std::find(e_all.begin(), e_all.end(), e) - e_all.begin()));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<DomainId> ColoredMnistSpec::all_domains() const {
  std::vector<DomainId> out(e_all.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<DomainId>(i);
  return out;
}

FeatureDataset gen_colored_mnist(const ColoredMnistSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_per_domain;
  std::vector<Block> blocks(spec.e_all.size());
  parallel_for(blocks.size(), [&](std::size_t b) {
    auto rng = block_rng(spec.seed, b, 1);
    const double e = spec.e_all[b];
    const auto y = binary_labels(n, spec.exact_balance, rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss;
    auto& blk = blocks[b];
    blk.features.resize(2 * n);
    blk.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int yhat = unif(rng) < 1.0 - spec.flip_prob ? y[i] : 1 - y[i];
      const double shape = spec.shape_mean * (2 * yhat - 1) + gauss(rng);
      const bool red = unif(rng) < e + (1.0 - 2.0 * e) * y[i];
      const double color = (red ? 1.0 : -1.0) + spec.color_noise * gauss(rng);
      blk.features[2 * i] = static_cast<float>(shape);
      blk.features[2 * i + 1] = static_cast<float>(color);
      blk.labels[i] = static_cast<Label>(y[i] + 1);
    }
  });
  return assemble(2, blocks, spec.all_domains());
}

void GaussianLemmaSpec::validate() const {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("t must be positive");
  if (!(k > 1.0) || !std::isfinite(k)) throw InvalidInput("k must exceed 1");
  if (n_per_domain < 1) throw InvalidInput("n_per_domain must be >= 1");
}

double GaussianLemmaSpec::a(DomainId domain) const {
  switch (domain) {
    case 1: return -std::sqrt(t / 2.0);
    case 2: return std::sqrt(t / 2.0);
    case 3: return -std::sqrt(k * t / 2.0);
    case 4: return std::sqrt(k * t / 2.0);
    default: throw InvalidInput("Gaussian lemma domains are 1..4");
  }
}

double GaussianLemmaSpec::r() const { return std::sqrt(t); }

FeatureDataset gen_gaussian_lemma(const GaussianLemmaSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_per_domain;
  const auto ids = GaussianLemmaSpec::all_domains();
  std::vector<Block> blocks(ids.size());
  parallel_for(blocks.size(), [&](std::size_t b) {
    auto rng = block_rng(spec.seed, b, 2);
    const double a = spec.a(ids[b]);
    const double r = spec.r();
    const auto y01 = binary_labels(n, spec.exact_balance, rng);
    std::normal_distribution<double> gauss;
    auto& blk = blocks[b];
    blk.features.resize(2 * n);
    blk.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = y01[i] == 1 ? 1.0 : -1.0;
      blk.features[2 * i] = static_cast<float>(r * y + gauss(rng));
      blk.features[2 * i + 1] = static_cast<float>(a * y + gauss(rng));
      blk.labels[i] = static_cast<Label>(y01[i] + 1);
    }
  });
  return assemble(2, blocks, ids);
}

LemmaClassifierEval eval_lemma_classifier(const GaussianLemmaSpec& spec, std::array<double, 2> w, bool normalize) {
  spec.validate();
  const double norm = std::hypot(w[0], w[1]);
  if (!(norm > 0.0)) throw InvalidInput("classifier weights must be nonzero");
  if (!normalize && std::abs(norm - 1.0) > 1e-9)
    throw InvalidInput("classifier weights must have unit norm when normalize is off");
  const double w1 = w[0] / norm;
  const double w2 = std::abs(w[1] / norm);
  if (!(w1 > 0.0)) throw InvalidInput("classifier needs w1 > 0");

  const double r = spec.r();
  const double hi = w1 * r - w2 * std::sqrt(spec.t / 2.0);
  const double lo = w1 * r - w2 * std::sqrt(spec.k * spec.t / 2.0);

  LemmaClassifierEval out;
  out.loss_avail = normal::sf(hi);
  out.loss_all = normal::sf(lo);
  out.err = normal::cdf(hi) - normal::cdf(lo);
  out.v_sup_symkl = spec.t * w2 * w2;
  // The standard normal pdf is unimodal, so its minimum over [lo, hi] sits at
  // an endpoint.
  const double c = std::min(normal::pdf(lo), normal::pdf(hi));
  out.c1 = c * (std::sqrt(spec.k) - 1.0) * std::sqrt(spec.t / 2.0) / (spec.k * spec.t);
  out.c1_bound = out.c1 * spec.k * out.v_sup_symkl;
  return out;
}

EmpiricalLosses lemma_classifier_monte_carlo(const FeatureDataset& ds, std::array<double, 2> w) {
  if (ds.dim() != 2 || ds.n_classes() != 2) throw InvalidInput("expected a two-feature binary dataset");
  EmpiricalLosses out;
  out.domains.assign(ds.domain_ids().begin(), ds.domain_ids().end());
  std::vector<std::size_t> errors(out.domains.size(), 0);
  std::vector<std::size_t> counts(out.domains.size(), 0);
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(out.domains.begin(), out.domains.end(), ds.domains()[i]) - out.domains.begin());
    const double s = w[0] * ds.feature(i, 0) + w[1] * ds.feature(i, 1);
    const Label predicted = s > 0.0 ? 2 : 1;
    ++counts[pos];
    if (predicted != ds.labels()[i]) ++errors[pos];
  }
  for (std::size_t p = 0; p < out.domains.size(); ++p) {
    const double loss = static_cast<double>(errors[p]) / static_cast<double>(counts[p]);
    out.loss.push_back(loss);
    out.loss_all = std::max(out.loss_all, loss);
    if (out.domains[p] == 1 || out.domains[p] == 2) out.loss_avail = std::max(out.loss_avail, loss);
  }
  out.err = out.loss_all - out.loss_avail;
  return out;
}

LemmaVariation lemma_symkl_variation(const GaussianLemmaSpec& spec, std::array<double, 2> w) {
  spec.validate();
  const double n2 = w[0] * w[0] + w[1] * w[1];
  if (!(n2 > 0.0)) throw InvalidInput("direction must be nonzero");
  const double share = w[1] * w[1] / n2;
  return {spec.t * share, spec.k * spec.t * share};
}

void TrapSpec::validate() const {
  if (!(correlation > 0.0 && correlation < 1.0)) throw InvalidInput("trap correlation must lie in (0, 1)");
  if (n_per_domain < 1) throw InvalidInput("n_per_domain must be >= 1");
}

FeatureDataset gen_trap(const TrapSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_per_domain;
  const std::vector<DomainId> ids{1, 2};
  std::vector<Block> blocks(2);
  parallel_for(2, [&](std::size_t b) {
    auto rng = block_rng(spec.seed, b, 3);
    const auto y01 = binary_labels(n, false, rng);
    std::normal_distribution<double> gauss;
    const double domain_sign = b == 0 ? 1.0 : -1.0;
    auto& blk = blocks[b];
    blk.features.resize(2 * n);
    blk.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = y01[i] == 1 ? 1.0 : -1.0;
      const double z1 = gauss(rng);
      const double z2 = gauss(rng);
      double h1 = 0.0;
      double h2 = 0.0;
      if (spec.variant == TrapSpec::Variant::paper) {
        h1 = 4.0 * y + z1;
        h2 = 4.0 * y * domain_sign + z2;
      } else {
        const double c = domain_sign * spec.correlation * y;
        h1 = z1;
        h2 = c * z1 + std::sqrt(1.0 - c * c) * z2;
      }
      blk.features[2 * i] = static_cast<float>(h1);
      blk.features[2 * i + 1] = static_cast<float>(h2);
      blk.labels[i] = static_cast<Label>(y01[i] + 1);
    }
  });
  return assemble(2, blocks, ids);
}

double trap_projection_tv(double correlation) {
  if (!(correlation > 0.0 && correlation < 1.0)) throw InvalidInput("trap correlation must lie in (0, 1)");
  const double va = 1.0 + correlation;
  const double vb = 1.0 - correlation;
  // The two zero-mean pdfs cross at +-x*.
  const double x2 = std::log(va / vb) * va * vb / (va - vb);
  const double x = std::sqrt(x2);
  return std::erf(x / std::sqrt(2.0 * vb)) - std::erf(x / std::sqrt(2.0 * va));
}

double colored_mnist_color_tv(double e1, double e2, double color_noise) {
  if (!(color_noise > 0.0)) throw InvalidInput("color_noise must be positive");
  return std::abs(e1 - e2) * std::erf(1.0 / (color_noise * std::numbers::sqrt2));
}

double colored_mnist_expansion_slope(const ColoredMnistSpec& spec) {
  spec.validate();
  const double avail = max_gap(spec.e_avail);
  if (!(avail > 0.0)) throw InvalidInput("expansion slope needs two distinct available domains");
  return max_gap(spec.e_all) / avail;
}

void ZooSpec::validate() const {
  if (e_avail.empty() || e_test.empty()) throw InvalidInput("zoo needs available and test domains");
  check_unit_interval(e_avail, "e_avail");
  check_unit_interval(e_test, "e_test");
  if (angles_deg.empty()) throw InvalidInput("zoo needs at least one model angle");
  for (double a : angles_deg)
    if (!(a >= 0.0 && a <= 90.0)) throw InvalidInput("zoo angles must lie in [0, 90] degrees");
  if (n_per_domain < 2) throw InvalidInput("n_per_domain must be >= 2");
  if (features_per_model < 1) throw InvalidInput("features_per_model must be >= 1");
  if (!(feature_noise >= 0.0)) throw InvalidInput("feature_noise must be >= 0");
}

std::vector<ZooModel> build_colored_mnist_zoo(const ZooSpec& spec) {
  spec.validate();
  ColoredMnistSpec base;
  base.e_avail = spec.e_avail;
  base.e_all = spec.e_avail;
  base.e_all.insert(base.e_all.end(), spec.e_test.begin(), spec.e_test.end());
  base.n_per_domain = spec.n_per_domain;
  base.shape_mean = spec.shape_mean;
  base.color_noise = spec.color_noise;
  base.seed = spec.seed;
  const auto data = gen_colored_mnist(base);
  const auto n_avail_domains = static_cast<DomainId>(spec.e_avail.size());

  std::vector<ZooModel> zoo;
  for (std::size_t m = 0; m < spec.angles_deg.size(); ++m) {
    const double angle = spec.angles_deg[m];
    const double rad = angle * std::numbers::pi / 180.0;
    const double cw = std::cos(rad);
    const double sw = std::sin(rad);
    auto rng = block_rng(spec.seed, 1000 + m, 4);
    std::normal_distribution<double> gauss;
    const std::size_t d = spec.features_per_model;

    std::vector<float> feats;
    std::vector<Label> labels;
    std::vector<DomainId> domains;
    std::size_t correct_avail = 0;
    std::size_t count_avail = 0;
    std::vector<std::size_t> correct_test(spec.e_test.size(), 0);
    std::vector<std::size_t> count_test(spec.e_test.size(), 0);
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
      const double score = cw * data.feature(i, 0) + sw * data.feature(i, 1);
      double mean = 0.0;
      const bool avail = data.domains()[i] < n_avail_domains;
      for (std::size_t j = 0; j < d; ++j) {
        const double f = score + spec.feature_noise * gauss(rng);
        mean += f;
        if (avail) feats.push_back(static_cast<float>(f));
      }
      const bool right = (mean > 0.0 ? 2 : 1) == data.labels()[i];
      if (avail) {
        labels.push_back(data.labels()[i]);
        domains.push_back(data.domains()[i]);
        ++count_avail;
        correct_avail += right ? 1 : 0;
      } else {
        const auto t = data.domains()[i] - n_avail_domains;
        ++count_test[t];
        correct_test[t] += right ? 1 : 0;
      }
    }
    double ood = 1.0;
    for (std::size_t t = 0; t < count_test.size(); ++t)
      ood = std::min(ood, static_cast<double>(correct_test[t]) / static_cast<double>(count_test[t]));

    char id[32];
    std::snprintf(id, sizeof id, "angle%02d", static_cast<int>(std::lround(angle)));
    zoo.push_back({id, angle, FeatureDataset(d, 2, std::move(feats), std::move(labels), std::move(domains)),
                   static_cast<double>(correct_avail) / static_cast<double>(count_avail), ood});
  }
  return zoo;
}

std::string sidecar_json(const ColoredMnistSpec& spec) {
  spec.validate();
  double tv_avail = 0.0;
  double tv_all = 0.0;
  for (double a : spec.e_avail)
    for (double b : spec.e_avail) tv_avail = std::max(tv_avail, colored_mnist_color_tv(a, b, spec.color_noise));
  for (double a : spec.e_all)
    for (double b : spec.e_all) tv_all = std::max(tv_all, colored_mnist_color_tv(a, b, spec.color_noise));
  nlohmann::json doc = {
      {"generator", "colored-mnist"},
      {"spec",
       {{"e_avail", spec.e_avail},
        {"e_all", spec.e_all},
        {"n_per_domain", spec.n_per_domain},
        {"flip_prob", spec.flip_prob},
        {"shape_mean", spec.shape_mean},
        {"color_noise", spec.color_noise},
        {"seed", spec.seed},
        {"exact_balance", spec.exact_balance}}},
      {"features", {"shape", "color"}},
      {"avail_domains", spec.avail_domains()},
      {"all_domains", spec.all_domains()},
      {"oracle",
       {{"color_tv_variation_avail", tv_avail},
        {"color_tv_variation_all", tv_all},
        {"shape_tv_variation", 0.0},
        {"expansion_slope", max_gap(spec.e_avail) > 0 ? colored_mnist_expansion_slope(spec) : 0.0}}}};
  return doc.dump(2) + "\n";
}

std::string sidecar_json(const GaussianLemmaSpec& spec) {
  spec.validate();
  const std::array<double, 2> diag{std::sqrt(0.5), std::sqrt(0.5)};
  const auto var = lemma_symkl_variation(spec, diag);
  const auto eval = eval_lemma_classifier(spec, diag);
  nlohmann::json doc = {
      {"generator", "gaussian-lemma"},
      {"spec",
       {{"t", spec.t},
        {"k", spec.k},
        {"n_per_domain", spec.n_per_domain},
        {"seed", spec.seed},
        {"exact_balance", spec.exact_balance}}},
      {"derived", {{"a", {spec.a(1), spec.a(2), spec.a(3), spec.a(4)}}, {"r", spec.r()}}},
      {"features", {"z", "eta"}},
      {"avail_domains", GaussianLemmaSpec::avail_domains()},
      {"all_domains", GaussianLemmaSpec::all_domains()},
      {"oracle",
       {{"expansion_slope", spec.k},
        {"diagonal_direction",
         {{"w", diag},
          {"symkl_variation_avail", var.avail},
          {"symkl_variation_all", var.all},
          {"loss_avail", eval.loss_avail},
          {"loss_all", eval.loss_all},
          {"err", eval.err},
          {"c1", eval.c1},
          {"c1_bound", eval.c1_bound}}}}}};
  return doc.dump(2) + "\n";
}

std::string sidecar_json(const TrapSpec& spec) {
  spec.validate();
  nlohmann::json doc = {
      {"generator", "trap"},
      {"spec",
       {{"variant", spec.variant == TrapSpec::Variant::paper ? "paper" : "strict"},
        {"correlation", spec.correlation},
        {"n_per_domain", spec.n_per_domain},
        {"seed", spec.seed}}},
      {"avail_domains", {1, 2}},
      {"all_domains", {1, 2}}};
  if (spec.variant == TrapSpec::Variant::strict)
    doc["oracle"] = {{"coordinate_tv_variation", 0.0},
                     {"diagonal_tv_variation", trap_projection_tv(spec.correlation)}};
  return doc.dump(2) + "\n";
}

}  // namespace oodsel
