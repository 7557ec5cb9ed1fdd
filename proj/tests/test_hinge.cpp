#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pwa/hinge.hpp"
#include "pwa/random.hpp"

#include <cmath>
#include <vector>

using namespace pwa;

namespace {

OgdWeights random_ball_weights(int K, int p, SeededRng& rng,
                               bool unit_norm = false) {
  OgdWeights w = OgdWeights::zeros(K, p);
  for (int i = 0; i < K; ++i) {
    Vector v = unit_norm ? rng.unit_vector(p) : rng.ball_vector(p, 1.0);
    w.w.row(i) = v.transpose();
  }
  return w;
}

// gamma-ambiguity set membership: |<w_i - w_j, xbar>| <= gamma for some pair.
bool in_ambiguity_set(const OgdWeights& w, const Vector& xbar, double gamma) {
  for (int i = 0; i < w.num_modes(); ++i)
    for (int j = i + 1; j < w.num_modes(); ++j)
      if (std::abs((w.w.row(i) - w.w.row(j)).dot(xbar)) <= gamma) return true;
  return false;
}

}  // namespace

TEST_CASE("hinge loss closed-form cases") {
  SeededRng rng(1);
  const int K = 3, p = 4;
  Vector xbar = rng.gaussian_vector(p, 1.0);

  // All-zero weights: every inner product vanishes, loss = 1.
  OgdWeights zero = OgdWeights::zeros(K, p);
  CHECK(hinge_loss(zero, xbar, 1, 0.5) == doctest::Approx(1.0));

  // Margin satisfied for every competitor: loss = 0.
  OgdWeights w = OgdWeights::zeros(2, 2);
  w.w << 1, 0, -1, 0;
  Vector e1(2);
  e1 << 5.0, 0.0;
  CHECK(hinge_loss(w, e1, 0, 1.0) == doctest::Approx(0.0));

  // K=2, gamma=1, <w_0 - w_1, xbar> = -0.5 at label 0 -> 1.5.
  OgdWeights w2 = OgdWeights::zeros(2, 2);
  w2.w << -0.25, 0, 0.25, 0;
  Vector x(2);
  x << 1.0, 0.0;
  CHECK(hinge_loss(w2, x, 0, 1.0) == doctest::Approx(1.5));

  // K=1 returns zero; bad labels throw.
  OgdWeights w1 = OgdWeights::zeros(1, p);
  CHECK(hinge_loss(w1, xbar, 0, 1.0) == 0.0);
  CHECK_THROWS(hinge_loss(w, e1, 5, 1.0));
}

TEST_CASE("subgradient structure and norm bound") {
  SeededRng rng(2);
  const int K = 4, p = 3;
  for (int trial = 0; trial < 2000; ++trial) {
    OgdWeights w = random_ball_weights(K, p, rng);
    Vector xbar = rng.gaussian_vector(p, 1.0);
    const int label = static_cast<int>(rng.uniform_index(K));
    const double gamma = rng.uniform(0.05, 2.0);
    Matrix grad = hinge_subgradient(w, xbar, label, gamma);
    if (hinge_loss(w, xbar, label, gamma) == 0.0) {
      CHECK(grad.norm() == 0.0);
    } else {
      // Exactly two active rows of magnitude ||xbar||/gamma.
      CHECK(grad.norm() ==
            doctest::Approx(std::sqrt(2.0) * xbar.norm() / gamma)
                .epsilon(1e-12));
      CHECK(grad.row(label).norm() ==
            doctest::Approx(xbar.norm() / gamma).epsilon(1e-12));
    }
  }
}

TEST_CASE("subgradient matches finite differences away from kinks") {
  SeededRng rng(3);
  const int K = 3, p = 4;
  int checked = 0;
  for (int trial = 0; trial < 5000 && checked < 500; ++trial) {
    OgdWeights w = random_ball_weights(K, p, rng);
    Vector xbar = rng.gaussian_vector(p, 1.0);
    const int label = static_cast<int>(rng.uniform_index(K));
    const double gamma = rng.uniform(0.2, 1.5);

    // Kink guards: loss bounded away from 0 and the top-two competitors
    // separated.
    const double loss = hinge_loss(w, xbar, label, gamma);
    if (loss < 1e-3) continue;
    std::vector<double> vals;
    for (int j = 0; j < K; ++j) {
      if (j == label) continue;
      vals.push_back(1.0 - (w.w.row(label) - w.w.row(j)).dot(xbar) / gamma);
    }
    std::sort(vals.begin(), vals.end());
    if (vals.size() >= 2 && vals[vals.size() - 1] - vals[vals.size() - 2] < 1e-3)
      continue;

    Matrix grad = hinge_subgradient(w, xbar, label, gamma);
    Matrix dir(K, p);
    for (int i = 0; i < K; ++i)
      dir.row(i) = rng.gaussian_vector(p, 1.0).transpose();
    dir /= dir.norm();

    const double h = 1e-6;
    OgdWeights w_plus = w;
    w_plus.w += h * dir;
    const double fd =
        (hinge_loss(w_plus, xbar, label, gamma) - loss) / h;
    const double analytic = (grad.array() * dir.array()).sum();
    CHECK(fd == doctest::Approx(analytic).epsilon(1e-4));
    ++checked;
  }
  CHECK(checked >= 500);
}

TEST_CASE("hinge dominates the 0/1 indicator") {
  SeededRng rng(4);
  for (int trial = 0; trial < 20000; ++trial) {
    const int K = 2 + static_cast<int>(rng.uniform_index(3));
    const int p = 3;
    OgdWeights w = random_ball_weights(K, p, rng);
    Vector xbar = rng.ball_vector(p, 1.0);
    const int label = static_cast<int>(rng.uniform_index(K));
    const double gamma = rng.uniform(0.05, 2.0);
    const double indicator = w.predict(xbar) != label ? 1.0 : 0.0;
    CHECK(hinge_loss(w, xbar, label, gamma) >= indicator - 1e-12);
  }
}

TEST_CASE("soft-margin indicator bound") {
  // For unit-ball components and ||xbar|| <= 1:
  // hinge <= 1[ambiguity set] + (1 + 2/gamma) * 1[argmax != label].
  SeededRng rng(5);
  for (int trial = 0; trial < 20000; ++trial) {
    const int K = 2 + static_cast<int>(rng.uniform_index(3));
    const int p = 4;
    const bool exactly_unit = trial % 2 == 0;
    OgdWeights w = random_ball_weights(K, p, rng, exactly_unit);
    Vector xbar = rng.ball_vector(p, 1.0);
    const int label = static_cast<int>(rng.uniform_index(K));
    const double gamma = rng.uniform(0.05, 2.0);
    const double lhs = hinge_loss(w, xbar, label, gamma);
    const double mismatch = w.predict(xbar) != label ? 1.0 : 0.0;
    const double rhs = (in_ambiguity_set(w, xbar, gamma) ? 1.0 : 0.0) +
                       (1.0 + 2.0 / gamma) * mismatch;
    CHECK(lhs <= rhs + 1e-9);
  }
}

TEST_CASE("projection onto unit balls is idempotent on feasible points") {
  SeededRng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    OgdWeights w = random_ball_weights(3, 4, rng);
    OgdWeights before = w;
    project_unit_balls(w);
    CHECK((w.w - before.w).norm() == 0.0);
    w.w *= 3.0;
    project_unit_balls(w);
    CHECK(w.feasible());
  }
}

TEST_CASE("ogd epoch basics") {
  SeededRng rng(7);
  const int K = 3, p = 3;
  OgdWeights w = random_ball_weights(K, p, rng);
  std::vector<Vector> xs = {rng.gaussian_vector(p, 1.0),
                            rng.gaussian_vector(p, 1.0)};
  std::vector<int> labels = {0, 2};

  // eta = 0 leaves the weights unchanged.
  OgdWeights same = ogd_epoch(w, xs, labels, 0.5, 0.0);
  CHECK((same.w - w.w).norm() == 0.0);

  // A zero-loss sample leaves the weights unchanged.
  OgdWeights sep = OgdWeights::zeros(2, 2);
  sep.w << 1, 0, -1, 0;
  Vector x(2);
  x << 5.0, 0.0;
  OgdWeights after = ogd_epoch(sep, {x}, {0}, 1.0, 0.3);
  CHECK((after.w - sep.w).norm() == 0.0);
}

namespace {

struct HingeSequence {
  std::vector<Vector> xbars;
  std::vector<int> labels;
};

HingeSequence random_sequence(int T, int K, int p, SeededRng& rng) {
  HingeSequence seq;
  for (int t = 0; t < T; ++t) {
    seq.xbars.push_back(rng.ball_vector(p, 1.0));
    seq.labels.push_back(static_cast<int>(rng.uniform_index(K)));
  }
  return seq;
}

double sequence_loss(const OgdWeights& w, const HingeSequence& seq,
                     double gamma) {
  double total = 0.0;
  for (std::size_t t = 0; t < seq.xbars.size(); ++t)
    total += hinge_loss(w, seq.xbars[t], seq.labels[t], gamma);
  return total;
}

// Regret of sequential OGD against an offline comparator found by heavy
// batch subgradient descent (imperfect comparators only shrink the regret).
double measure_ogd_regret(const HingeSequence& seq, int K, int p, double gamma,
                          double eta) {
  OgdWeights w = OgdWeights::zeros(K, p);
  double online = 0.0;
  for (std::size_t t = 0; t < seq.xbars.size(); ++t) {
    online += hinge_loss(w, seq.xbars[t], seq.labels[t], gamma);
    Matrix g = hinge_subgradient(w, seq.xbars[t], seq.labels[t], gamma);
    w.w -= eta * g;
    project_unit_balls(w);
  }
  OgdWeights comparator =
      fit_weights_batch_hinge(seq.xbars, seq.labels, K, gamma, 400);
  return online - sequence_loss(comparator, seq, gamma);
}

}  // namespace

TEST_CASE("ogd regret stays within 4K/eta + eta*T/gamma^2") {
  SeededRng rng(8);
  const int T = 800, K = 3, p = 3;
  for (int trial = 0; trial < 10; ++trial) {
    HingeSequence seq = random_sequence(T, K, p, rng);
    const double gamma = rng.uniform(0.2, 1.0);
    const double eta = rng.uniform(0.002, 0.05);
    const double regret = measure_ogd_regret(seq, K, p, gamma, eta);
    const double bound = 4.0 * K / eta + eta * T / (gamma * gamma);
    CHECK(regret <= bound);
  }
}

TEST_CASE("ogd regret is minimized near eta = gamma*sqrt(4K/T)") {
  SeededRng rng(9);
  const int T = 2000, K = 2, p = 3;
  const double gamma = 0.5;
  const double eta_star = gamma * std::sqrt(4.0 * K / T);

  // Average measured regret over a few sequences per eta on a log grid.
  std::vector<double> etas;
  for (double f : {0.05, 0.15, 0.5, 1.0, 2.0, 6.0, 20.0})
    etas.push_back(f * eta_star);
  std::vector<double> avg(etas.size(), 0.0);
  const int reps = 5;
  for (int r = 0; r < reps; ++r) {
    HingeSequence seq = random_sequence(T, K, p, rng);
    for (std::size_t e = 0; e < etas.size(); ++e)
      avg[e] += measure_ogd_regret(seq, K, p, gamma, etas[e]) / reps;
  }
  std::size_t best = 0;
  for (std::size_t e = 1; e < etas.size(); ++e)
    if (avg[e] < avg[best]) best = e;
  // Minimizer within grid resolution of the theoretical tuning.
  CHECK(etas[best] >= 0.1 * eta_star);
  CHECK(etas[best] <= 10.0 * eta_star);
}

TEST_CASE("weights round-trip to an affine classifier") {
  SeededRng rng(10);
  OgdWeights w = random_ball_weights(3, 4, rng);
  AffineClassifier g = weights_to_classifier(w, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector x = rng.gaussian_vector(3, 1.0);
    CHECK(classify(g, x) == w.predict(lift(x)));
  }
}
