#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "oodsel/dataio.hpp"

namespace oodsel {

// Feature-level Colored MNIST: d = 2 (shape score, color score). Domain ids
// are indices into e_all.
struct ColoredMnistSpec {
  std::vector<double> e_avail{0.1, 0.2};
  std::vector<double> e_all{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t n_per_domain = 50000;
  double flip_prob = 0.25;
  double shape_mean = 1.0;
  double color_noise = 0.05;
  std::uint64_t seed = 0;
  bool exact_balance = false;

  void validate() const;
  std::vector<DomainId> avail_domains() const;
  std::vector<DomainId> all_domains() const;
};

// Per sample: Y uniform on {0,1}; digit label Yhat = Y w.p. 1 - flip_prob;
// shape ~ N(shape_mean (2 Yhat - 1), 1); red w.p. e + (1 - 2e) Y;
// color = (2 red - 1) + N(0, color_noise^2). Labels are Y + 1.
FeatureDataset gen_colored_mnist(const ColoredMnistSpec& spec);

// Two-feature Gaussian family: y uniform on {-1, +1}, z ~ N(r y, 1),
// eta ~ N(a_e y, 1), domains 1..4 with 1, 2 available.
struct GaussianLemmaSpec {
  double t = 0.5;
  double k = 4.0;
  std::size_t n_per_domain = 50000;
  std::uint64_t seed = 0;
  bool exact_balance = false;

  void validate() const;
  // a_1 = -sqrt(t/2), a_2 = sqrt(t/2), a_3 = -sqrt(kt/2), a_4 = sqrt(kt/2).
  double a(DomainId domain) const;
  double r() const;  // sqrt(t)
  static std::vector<DomainId> avail_domains() { return {1, 2}; }
  static std::vector<DomainId> all_domains() { return {1, 2, 3, 4}; }
};

FeatureDataset gen_gaussian_lemma(const GaussianLemmaSpec& spec);

struct LemmaClassifierEval {
  double loss_avail = 0.0;   // worst available-domain 0-1 loss of sign(w^T x)
  double loss_all = 0.0;     // worst loss over all four domains
  double err = 0.0;          // loss_all - loss_avail
  double v_sup_symkl = 0.0;  // t * w2_hat^2
  double c1 = 0.0;           // C (sqrt(k) - 1) sqrt(t/2) / (k t)
  double c1_bound = 0.0;     // c1 * k * v_sup_symkl
};

// Closed-form losses of the classifier sign(w^T x). C is the minimum of the
// standard normal pdf over the integration interval of err. With
// normalize = false, w must already have unit norm.
LemmaClassifierEval eval_lemma_classifier(const GaussianLemmaSpec& spec, std::array<double, 2> w,
                                          bool normalize = true);

struct EmpiricalLosses {
  std::vector<DomainId> domains;
  std::vector<double> loss;  // per-domain 0-1 loss
  double loss_avail = 0.0;
  double loss_all = 0.0;
  double err = 0.0;
};

// Monte Carlo counterpart of eval_lemma_classifier on a generated dataset.
EmpiricalLosses lemma_classifier_monte_carlo(const FeatureDataset& ds, std::array<double, 2> w);

// Expected symmetric-KL variation of w^T x on the available / all domains.
struct LemmaVariation {
  double avail;
  double all;
};
LemmaVariation lemma_symkl_variation(const GaussianLemmaSpec& spec, std::array<double, 2> w);

// Two-domain construction whose per-coordinate view hides a joint shift.
// paper: h|y ~ N(y(4,4), I) in domain 1 and N(y(4,-4), I) in domain 2.
// strict: h|y ~ N(0, [[1, c], [c, 1]]) with c = +correlation*y in domain 1 and
// -correlation*y in domain 2, so each coordinate is N(0,1) in every cell.
struct TrapSpec {
  enum class Variant { paper, strict };
  Variant variant = Variant::strict;
  double correlation = 0.9;
  std::size_t n_per_domain = 50000;
  std::uint64_t seed = 0;

  void validate() const;
};

FeatureDataset gen_trap(const TrapSpec& spec);

// Closed-form TV between N(0, 1 + c) and N(0, 1 - c): the strict trap's
// class-conditional shift along (1, 1)/sqrt(2).
double trap_projection_tv(double correlation);

// TV between the class-conditional color laws of domains e1 and e2:
// |e1 - e2| * (2 Phi(1/color_noise) - 1).
double colored_mnist_color_tv(double e1, double e2, double color_noise);

// max |e - e'| over e_all divided by max |e - e'| over e_avail.
double colored_mnist_expansion_slope(const ColoredMnistSpec& spec);

// A zoo of models on Colored MNIST, from invariant (angle 0, shape only) to
// spurious (angle 90, color only). Each model exposes features_per_model
// noisy copies of cos(angle) shape + sin(angle) color and classifies with the
// sign of their mean.
struct ZooSpec {
  std::vector<double> e_avail{0.1, 0.2};
  std::vector<double> e_test{0.9};
  std::vector<double> angles_deg{0, 15, 30, 45, 60, 70, 80, 90};
  std::size_t n_per_domain = 20000;
  double shape_mean = 2.0;
  double color_noise = 0.05;
  std::size_t features_per_model = 4;
  double feature_noise = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ZooModel {
  std::string model_id;
  double angle_deg = 0.0;
  FeatureDataset avail_features;  // features on the available domains
  double val_accuracy = 0.0;      // accuracy on the available domains
  double ood_accuracy = 0.0;      // worst accuracy over the test domains
};

std::vector<ZooModel> build_colored_mnist_zoo(const ZooSpec& spec);

// JSON sidecar for a generated dataset. Besides the generator settings it
// records the domain split and the closed-form oracle values.
std::string sidecar_json(const ColoredMnistSpec& spec);
std::string sidecar_json(const GaussianLemmaSpec& spec);
std::string sidecar_json(const TrapSpec& spec);

}  // namespace oodsel
