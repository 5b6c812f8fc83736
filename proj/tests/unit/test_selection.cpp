#include <doctest.h>

#include <cmath>
#include <random>

#include "oodsel/error.hpp"
#include "oodsel/selection.hpp"

using namespace oodsel;

namespace {

ModelRecord rec(std::string id, double acc, double v) { return {std::move(id), acc, v, 0.0}; }

double pop_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size());
}

}  // namespace

TEST_CASE("r0 from the accuracy window") {
  const std::vector<ModelRecord> models{rec("a", 0.90, 0.2), rec("b", 0.88, 0.4), rec("c", 0.70, 0.9)};
  CHECK(accuracy_window(models, 0.1).size() == 2);
  CHECK(estimate_r0(models, 0.1) == doctest::Approx(0.1));
}

TEST_CASE("degenerate windows") {
  SUBCASE("equal accuracies") {
    const std::vector<ModelRecord> models{rec("a", 0.8, 0.1), rec("b", 0.8, 0.5)};
    CHECK(estimate_r0(models, 0.1) == 0.0);
  }
  SUBCASE("equal variations warn") {
    int warnings = 0;
    const auto prev = set_warning_handler([&](const std::string&) { ++warnings; });
    const std::vector<ModelRecord> models{rec("a", 0.8, 0.3), rec("b", 0.75, 0.3)};
    CHECK(estimate_r0(models, 0.1) == 0.0);
    set_warning_handler(prev);
    CHECK(warnings == 1);
  }
  SUBCASE("window of one") {
    const std::vector<ModelRecord> models{rec("a", 0.9, 0.3), rec("b", 0.5, 0.3)};
    CHECK_THROWS_WITH_AS(estimate_r0(models, 0.1), doctest::Contains("window too narrow"), InvalidInput);
  }
}

TEST_CASE("ranking with a fixed r0") {
  SelectionConfig cfg;
  cfg.r0 = 0.1;
  const auto res = select_models({rec("A", 0.85, 0.05), rec("B", 0.88, 0.60)}, cfg);
  CHECK(res.ranked[0].model_id == "A");
  CHECK(res.ranked[0].score == doctest::Approx(0.845));
  CHECK(res.ranked[1].score == doctest::Approx(0.820));
  CHECK(res.r0_used == 0.1);
  CHECK(res.to_csv() ==
        "model_id,val_accuracy,variation,r0_used,score,rank\n"
        "A,0.85,0.05,0.1,0.845,1\n"
        "B,0.88,0.6,0.1,0.8200000000000001,2\n");
}

TEST_CASE("r0 = 0 ranks by validation accuracy") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ModelRecord> models;
    for (int i = 0; i < 12; ++i) models.push_back(rec("m" + std::to_string(i), u(rng), u(rng)));
    SelectionConfig cfg;
    cfg.r0 = 0.0;
    const auto res = select_models(models, cfg);
    for (std::size_t i = 1; i < res.ranked.size(); ++i)
      CHECK(res.ranked[i - 1].val_accuracy >= res.ranked[i].val_accuracy);
  }
}

TEST_CASE("ties break by accuracy, then id") {
  SelectionConfig cfg;
  cfg.r0 = 1.0;
  const auto res = select_models({rec("z", 0.5, 0.0), rec("b", 0.75, 0.25), rec("a", 0.75, 0.25)}, cfg);
  CHECK(res.ranked[0].model_id == "a");
  CHECK(res.ranked[1].model_id == "b");
  CHECK(res.ranked[2].model_id == "z");
}

TEST_CASE("selection properties") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ModelRecord> models;
    const int n = 2 + static_cast<int>(rng() % 15);
    for (int i = 0; i < n; ++i) models.push_back(rec("m" + std::to_string(i), 0.6 + 0.3 * u(rng), u(rng)));
    SelectionConfig cfg;
    cfg.acc_window = 1.0;
    const auto res = select_models(models, cfg);
    std::vector<double> acc, var;
    for (const auto& m : models) {
      acc.push_back(m.val_accuracy);
      var.push_back(m.variation);
    }
    CHECK(res.r0_used == doctest::Approx(pop_std(acc) / pop_std(var)));
    CHECK(res.ranked.size() == models.size());
    for (std::size_t i = 0; i < res.ranked.size(); ++i) {
      const auto& m = res.ranked[i];
      CHECK(m.score == doctest::Approx(m.val_accuracy - res.r0_used * m.variation));
      if (i > 0) CHECK(res.ranked[i - 1].score >= m.score);
    }
    // Permuting the input does not change the ranking.
    std::shuffle(models.begin(), models.end(), rng);
    const auto again = select_models(models, cfg);
    for (std::size_t i = 0; i < res.ranked.size(); ++i) CHECK(again.ranked[i].model_id == res.ranked[i].model_id);
  }
}

TEST_CASE("selection validation") {
  SelectionConfig cfg;
  CHECK_THROWS_AS(select_models({}, cfg), InvalidInput);
  cfg.acc_window = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg.acc_window = 0.1;
  cfg.r0 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg.r0 = 0.5;
  CHECK_THROWS_AS(select_models({rec("a", 1.5, 0.1)}, cfg), InvalidInput);
  CHECK_THROWS_AS(select_models({rec("a", 0.5, -0.1)}, cfg), InvalidInput);
}
