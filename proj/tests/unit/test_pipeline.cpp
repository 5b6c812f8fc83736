#include <doctest.h>

#include <random>
#include <set>

#include "oodsel/error.hpp"
#include "oodsel/pipeline.hpp"
#include "tmpdir.hpp"

using namespace oodsel;

namespace {

// Two domains, one feature: label-conditional mean shifted by `shift` in domain 1.
FeatureDataset shifted(double shift, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<float> x;
  std::vector<Label> y;
  std::vector<DomainId> e;
  for (DomainId d = 0; d < 2; ++d)
    for (int i = 0; i < 4000; ++i) {
      const Label lab = static_cast<Label>(1 + i % 2);
      x.push_back(static_cast<float>(g(rng) + (lab == 2 ? 2.0 : -2.0) + (d == 1 ? shift : 0.0)));
      y.push_back(lab);
      e.push_back(d);
    }
  return FeatureDataset(1, 2, std::move(x), std::move(y), std::move(e));
}

}  // namespace

TEST_CASE("pruning keeps the winner of a full scoring pass") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int pruned_any = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<Candidate> c;
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) {
      c.push_back({"m" + std::to_string(i), std::round(u(rng) * 1000) / 1000});
      v.push_back(u(rng) * 0.5);
    }
    SelectionConfig cfg;
    cfg.acc_window = 0.05 + 0.3 * u(rng);
    if (trial % 3 == 0) cfg.r0 = 2.0 * u(rng);
    std::size_t calls = 0;
    auto var = [&](std::size_t i) {
      ++calls;
      return v[i];
    };
    PrunedSelection lazy, full;
    try {
      lazy = select_with_pruning(c, var, cfg);
    } catch (const InvalidInput&) {
      // Auto r0 needs two models in the window; the full pass must agree.
      CHECK_THROWS_AS(select_with_pruning(c, var, cfg, true), InvalidInput);
      continue;
    }
    const std::size_t lazy_calls = calls;
    full = select_with_pruning(c, var, cfg, true);
    CHECK(lazy_calls == lazy.result.ranked.size());
    CHECK(lazy.result.ranked.size() + lazy.unscored.size() == n);
    CHECK(full.unscored.empty());
    CHECK(lazy.result.r0_used == full.result.r0_used);
    CHECK(lazy.result.ranked.front().model_id == full.result.ranked.front().model_id);
    CHECK(lazy.result.ranked.front().score == full.result.ranked.front().score);
    for (const auto& m : lazy.unscored) CHECK(m.val_accuracy <= lazy.result.ranked.front().score + 1e-12);
    pruned_any += !lazy.unscored.empty();
  }
  CHECK(pruned_any > 0);
}

TEST_CASE("unscored models appear with empty columns") {
  const std::vector<Candidate> c{{"a", 0.9}, {"b", 0.88}, {"c", 0.5}, {"d", 0.4}};
  const std::vector<double> v{0.1, 0.0, 0.0, 0.0};
  SelectionConfig cfg;
  cfg.r0 = 1.0;
  const auto r = select_with_pruning(c, [&](std::size_t i) { return v[i]; }, cfg);
  REQUIRE(r.unscored.size() == 2);
  CHECK(r.unscored[0].model_id == "c");
  CHECK(r.unscored[1].model_id == "d");
  CHECK(r.result.ranked.front().model_id == "b");
  CHECK(r.to_csv() ==
        "model_id,val_accuracy,variation,r0_used,score,rank\n"
        "b,0.88,0,1,0.88,1\n"
        "a,0.9,0.1,1,0.8,2\n"
        "c,0.5,,1,,\n"
        "d,0.4,,1,,\n");
}

TEST_CASE("candidate validation") {
  SelectionConfig cfg;
  cfg.r0 = 0.0;
  auto zero = [](std::size_t) { return 0.0; };
  CHECK_THROWS_AS(select_with_pruning({}, zero, cfg), InvalidInput);
  CHECK_THROWS_AS(select_with_pruning({{"a", 0.5}, {"a", 0.6}}, zero, cfg), InvalidInput);
  CHECK_THROWS_AS(select_with_pruning({{"a", 1.5}}, zero, cfg), InvalidInput);
  CHECK_THROWS_AS(select_with_pruning({{"a", std::nan("")}}, zero, cfg), InvalidInput);
}

TEST_CASE("selection from a manifest") {
  TempDir dir;
  write_dataset(shifted(0.0, 1), dir / "stable.oodf");
  write_dataset(shifted(3.0, 2), dir / "shifting.oodf");
  const std::string json = R"({"models": [
    {"model_id": "stable", "feature_file": "stable.oodf", "val_accuracy": 0.80},
    {"model_id": "shifting", "feature_file": {"avail": "shifting.oodf"}, "val_accuracy": 0.85}]})";
  const auto manifest = parse_manifest(json, dir.path);

  ManifestSelectionOptions opts;
  opts.selection.r0 = 1.0;
  opts.score_all = true;
  const auto r = select_from_manifest(manifest, opts);
  REQUIRE(r.result.ranked.size() == 2);
  CHECK(r.result.ranked[0].model_id == "stable");
  CHECK(r.result.ranked[0].variation < 0.05);
  CHECK(r.result.ranked[1].variation > 0.8);

  // Restricting to one domain leaves nothing to compare.
  opts.avail_domains = {0};
  const auto one = select_from_manifest(manifest, opts);
  CHECK(one.result.ranked[0].model_id == "shifting");
  CHECK(one.result.ranked[0].variation == 0.0);

  opts.avail_domains = {0, 7};
  CHECK_THROWS_WITH_AS(select_from_manifest(manifest, opts), doctest::Contains("model '"), InvalidInput);

  const auto missing = parse_manifest(
      R"({"models": [{"model_id": "ghost", "feature_file": "nope.oodf", "val_accuracy": 0.5}]})", dir.path);
  opts.avail_domains.clear();
  opts.selection.r0 = 0.0;
  CHECK_THROWS_WITH(select_from_manifest(missing, opts), doctest::Contains("ghost"));
}
