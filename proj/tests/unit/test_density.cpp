#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oodsel/density.hpp"
#include "oodsel/error.hpp"
#include "oracles.hpp"

using namespace oodsel;

namespace {

double max_abs_dev(const Density1D& d, const std::function<double(double)>& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(d.mass()[i] - f(d.x(i))));
  return worst;
}

struct WarningCapture {
  std::vector<std::string> messages;
  WarningHandler previous;
  WarningCapture() {
    previous = set_warning_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { set_warning_handler(previous); }
};

}  // namespace

TEST_CASE("trapezoid rule") {
  const std::vector<double> ones(11, 1.0);
  CHECK(trapezoid(ones, 0.1) == doctest::Approx(1.0));
  const std::vector<double> ramp{0.0, 1.0, 2.0};
  CHECK(trapezoid(ramp, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("bandwidth rules match hand computation") {
  const std::vector<double> s{1, 2, 3, 4, 10};
  // sd = sqrt(50/4); type-7 quartiles 2 and 4 -> IQR/1.34 = 1.49254.
  const double sd = std::sqrt(12.5);
  const double robust = 2.0 / 1.34;
  CHECK(select_bandwidth(s, BandwidthRule::silverman()) ==
        doctest::Approx(0.9 * std::min(sd, robust) * std::pow(5.0, -0.2)));
  CHECK(select_bandwidth(s, BandwidthRule::scott()) == doctest::Approx(1.06 * sd * std::pow(5.0, -0.2)));
  CHECK(select_bandwidth(s, BandwidthRule::fixed(0.3)) == 0.3);

  const std::vector<double> flat_iqr{1, 1, 1, 1, 1, 1, 1, 5};
  double m = 12.0 / 8.0, ss = 0.0;
  for (double v : flat_iqr) ss += (v - m) * (v - m);
  CHECK(select_bandwidth(flat_iqr, BandwidthRule::silverman()) ==
        doctest::Approx(0.9 * std::sqrt(ss / 7.0) * std::pow(8.0, -0.2)));

  CHECK(select_bandwidth(std::vector<double>{2, 2, 2}, BandwidthRule::silverman()) == 0.0);
  CHECK_THROWS_AS(select_bandwidth(std::vector<double>{1.0}, BandwidthRule::silverman()), InvalidInput);
  CHECK_THROWS_AS(select_bandwidth(s, BandwidthRule::fixed(-1.0)), InvalidInput);
}

TEST_CASE("KDE of 50,000 standard normal draws") {
  const auto draws = oracle::normal_draws(50000, 0.0, 1.0, 1);
  const auto d = estimate_density(draws, BandwidthRule::silverman(), GridSpec{512, 3.0});
  CHECK(d.size() == 512);
  CHECK(trapezoid(d.mass(), d.step()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_abs_dev(d, [](double x) { return oracle::npdf(x); }) <= 0.01);
}

TEST_CASE("constant samples use the fallback bandwidth") {
  WarningCapture cap;
  const std::vector<double> fives(100, 5.0);
  const auto d = estimate_density(fives);
  CHECK(cap.messages.size() == 1);
  CHECK(d.bandwidth() > 0.0);
  CHECK(d.bandwidth() < 0.01);
  CHECK(trapezoid(d.mass(), d.step()) == doctest::Approx(1.0));
  const auto peak = std::max_element(d.mass().begin(), d.mass().end()) - d.mass().begin();
  CHECK(d.x(static_cast<std::size_t>(peak)) == doctest::Approx(5.0).epsilon(1e-3));
}

TEST_CASE("two samples with a fixed bandwidth form an equal-weight mixture") {
  const std::vector<double> s{0.0, 1.0};
  const auto d = estimate_density(s, BandwidthRule::fixed(0.5), GridSpec{1024, 6.0});
  const double dev = max_abs_dev(d, [](double x) { return 0.5 * oracle::npdf(x, 0, 0.5) + 0.5 * oracle::npdf(x, 1, 0.5); });
  CHECK(dev < 1e-6);
}

TEST_CASE("kernel recurrence agrees with direct summation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double h : {0.02, 0.1, 0.7, 3.0}) {
    std::vector<double> s(200);
    for (auto& v : s) v = u(rng);
    const std::size_t m = 300;
    const double lo = -3.0, step = 6.0 / (m - 1);
    std::vector<double> fast(m, 0.0);
    accumulate_kernels(s, h, lo, step, fast);
    for (std::size_t j = 0; j < m; ++j) {
      const double x = lo + j * step;
      double direct = 0.0;
      for (double v : s) direct += std::exp(-0.5 * ((x - v) / h) * ((x - v) / h));
      CHECK(fast[j] == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("KDE properties") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> size(2, 400);
  std::uniform_real_distribution<double> loc(-50.0, 50.0), scale(0.01, 20.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto s = oracle::normal_draws(static_cast<std::size_t>(size(rng)), loc(rng), scale(rng), trial);
    const auto d = estimate_density(s);
    CHECK(trapezoid(d.mass(), d.step()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::all_of(d.mass().begin(), d.mass().end(), [](double v) { return v >= 0.0; }));

    // Translation equivariance.
    const double shift = 3.5;
    for (auto& v : s) v += shift;
    const auto moved = estimate_density(s);
    CHECK(moved.lo() == doctest::Approx(d.lo() + shift));
    for (std::size_t i = 0; i < d.size(); i += 37)
      CHECK(moved.mass()[i] == doctest::Approx(d.mass()[i]).epsilon(1e-6).scale(1e-3));
  }
}

TEST_CASE("bandwidth narrower than the grid step is widened") {
  const auto samples = std::make_shared<const std::vector<double>>(std::vector<double>{0.0, 1.0, 2.0});
  const auto d = kde_on_grid(samples, 1e-6, -1.0, 3.0, 17);
  CHECK(d.bandwidth() == doctest::Approx(0.25));
  CHECK(trapezoid(d.mass(), d.step()) == doctest::Approx(1.0));
}

TEST_CASE("resampling re-evaluates the source") {
  const auto s = oracle::normal_draws(500, 1.0, 2.0, 4);
  const auto d = estimate_density(s);
  const auto wide = d.resampled(d.lo() - 5.0, d.hi() + 5.0, 700);
  const auto shared = std::make_shared<const std::vector<double>>(s);
  const auto direct = kde_on_grid(shared, d.bandwidth(), d.lo() - 5.0, d.hi() + 5.0, 700);
  for (std::size_t i = 0; i < 700; ++i) CHECK(wide.mass()[i] == doctest::Approx(direct.mass()[i]));

  const auto g = gaussian_density(0.0, 1.0);
  const auto g2 = g.resampled(-10.0, 10.0, 2001);
  CHECK(max_abs_dev(g2, [](double x) { return oracle::npdf(x); }) < 1e-6);

  const Density1D tab(0.0, 1.0, std::vector<double>(16, 1.0), 0.1);
  const auto t2 = tab.resampled(-1.0, 2.0, 31);
  CHECK(t2.mass()[0] == 0.0);
  CHECK(trapezoid(t2.mass(), t2.step()) == doctest::Approx(1.0));
}

TEST_CASE("exact Gaussian densities") {
  const auto d = gaussian_density(0.0, 1.0);
  const auto peak = std::max_element(d.mass().begin(), d.mass().end()) - d.mass().begin();
  CHECK(*std::max_element(d.mass().begin(), d.mass().end()) == doctest::Approx(0.3989).epsilon(1e-3));
  CHECK(d.x(static_cast<std::size_t>(peak)) == doctest::Approx(0.0).epsilon(0.02));
  // The support covers at least +-6 sd whatever the padding.
  const auto narrow = gaussian_density(3.0, 0.5, GridSpec{512, 0.5});
  CHECK(narrow.lo() <= 3.0 - 6 * 0.5);
  CHECK(narrow.hi() >= 3.0 + 6 * 0.5);
  const auto np = std::max_element(narrow.mass().begin(), narrow.mass().end()) - narrow.mass().begin();
  CHECK(narrow.x(static_cast<std::size_t>(np)) == doctest::Approx(3.0).epsilon(0.01));
  CHECK_THROWS_AS(gaussian_density(0.0, 0.0), InvalidInput);

  const auto mix = mixture_density({{0.3, -1.0, 0.2}, {0.7, 2.0, 0.5}}, GridSpec{4096, 6.0});
  CHECK(max_abs_dev(mix, [](double x) { return 0.3 * oracle::npdf(x, -1, 0.2) + 0.7 * oracle::npdf(x, 2, 0.5); }) <
        1e-4);
}

TEST_CASE("density validation") {
  CHECK_THROWS_AS(GridSpec({8, 3.0}).validate(), InvalidInput);
  CHECK_THROWS_AS(GridSpec({512, -1.0}).validate(), InvalidInput);
  CHECK_THROWS_AS(estimate_density(std::vector<double>{1.0}), InvalidInput);
  CHECK_THROWS_AS(estimate_density(std::vector<double>{1.0, NAN}), InvalidInput);
  CHECK_THROWS_AS(Density1D(1.0, 0.0, std::vector<double>(16, 1.0), 0.1), InvalidInput);
  CHECK_THROWS_AS(Density1D(0.0, 1.0, std::vector<double>(16, 0.0), 0.1), RuntimeFailure);
  CHECK(BandwidthRule::fixed(0.5).name() == "fixed(0.5)");
}
