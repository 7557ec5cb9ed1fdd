#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pwa/dyadic.hpp"
#include "pwa/random.hpp"
#include "pwa/types.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace pwa;

TEST_CASE("lift appends the constant coordinate") {
  Vector z(2);
  z << 0, 0;
  Vector lz = lift(z);
  CHECK(lz.size() == 3);
  CHECK(lz[0] == 0.0);
  CHECK(lz[1] == 0.0);
  CHECK(lz[2] == 1.0);

  Vector v(2);
  v << 3, -2;
  Vector lv = lift(v);
  CHECK(lv[0] == 3.0);
  CHECK(lv[1] == -2.0);
  CHECK(lv[2] == 1.0);
}

TEST_CASE("lift norm identity and injectivity") {
  SeededRng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Vector x = rng.gaussian_vector(4, 2.0);
    CHECK(lift(x).squaredNorm() ==
          doctest::Approx(x.squaredNorm() + 1.0).epsilon(1e-12));
    Vector y = rng.gaussian_vector(4, 2.0);
    if ((x - y).norm() > 0) CHECK((lift(x) - lift(y)).norm() > 0);
  }
}

namespace {

AffineClassifier two_mode_sign_classifier() {
  AffineClassifier g;
  g.directions = Matrix(2, 2);
  g.directions << 1, 0, -1, 0;
  g.offsets = Vector::Zero(2);
  g.offset_bound = 1.0;
  return g;
}

}  // namespace

TEST_CASE("classify picks the sign of the first coordinate") {
  AffineClassifier g = two_mode_sign_classifier();
  Vector x(2);
  x << 0.5, 0.0;
  CHECK(classify(g, x) == 0);
  x << -0.5, 0.0;
  CHECK(classify(g, x) == 1);
}

TEST_CASE("classify resolves ties to the lowest index") {
  AffineClassifier g = two_mode_sign_classifier();
  Vector x = Vector::Zero(2);
  CHECK(classify(g, x) == 0);

  // All-equal scores with three modes.
  AffineClassifier g3;
  g3.directions = Matrix::Zero(3, 2);
  g3.offsets = Vector::Zero(3);
  g3.offset_bound = 1.0;
  CHECK(classify(g3, x) == 0);
}

TEST_CASE("classify equals exhaustive score enumeration") {
  SeededRng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const int K = 3, d = 4;
    AffineClassifier g;
    g.directions = Matrix(K, d);
    for (int i = 0; i < K; ++i)
      g.directions.row(i) = rng.unit_vector(d).transpose() * rng.uniform();
    g.offsets = rng.gaussian_vector(K, 0.5);
    g.offset_bound = 10.0;
    Vector x = rng.gaussian_vector(d, 1.0);

    int best = 0;
    double best_score = g.directions.row(0).dot(x) + g.offsets[0];
    for (int i = 1; i < K; ++i) {
      const double s = g.directions.row(i).dot(x) + g.offsets[i];
      if (s > best_score) {
        best = i;
        best_score = s;
      }
    }
    CHECK(classify(g, x) == best);
  }
}

TEST_CASE("classify is invariant to a common offset shift") {
  SeededRng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 4, d = 3;
    AffineClassifier g;
    g.directions = Matrix(K, d);
    for (int i = 0; i < K; ++i)
      g.directions.row(i) = rng.unit_vector(d).transpose();
    g.offsets = rng.gaussian_vector(K, 1.0);
    g.offset_bound = 100.0;
    Vector x = rng.gaussian_vector(d, 1.0);

    // Shift by an exactly representable constant so float ties are stable.
    const double shift = 0.5;
    AffineClassifier shifted = g;
    shifted.offsets.array() += shift;
    CHECK(classify(g, x) == classify(shifted, x));
  }
}

TEST_CASE("dimensions validate") {
  CHECK_THROWS(Dimensions{0, 1, 1}.validate());
  CHECK_THROWS(Dimensions{1, 1, 0}.validate());
  CHECK_NOTHROW(Dimensions{1, 1, 1}.validate());
}

TEST_CASE("seeded rng reproduces draws bit-exactly") {
  SeededRng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  SeededRng c(42, 7), d(42, 7);
  for (int i = 0; i < 1000; ++i) {
    CHECK(c.gaussian() == d.gaussian());
    CHECK(c.uniform() == d.uniform());
  }
  // Different stream ids give different sequences.
  SeededRng e(42, 8);
  bool differs = false;
  SeededRng c2(42, 7);
  for (int i = 0; i < 10; ++i) differs |= (c2.next_u64() != e.next_u64());
  CHECK(differs);
}

TEST_CASE("rng moments are sane") {
  SeededRng rng(5);
  const int n = 200000;
  double mean = 0.0, var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    mean += g;
    var += g * g;
  }
  mean /= n;
  var /= n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);

  // Ball samples stay inside the radius.
  for (int i = 0; i < 1000; ++i)
    CHECK(rng.ball_vector(3, 2.5).norm() <= 2.5 + 1e-12);
}

TEST_CASE("affine map ball projection") {
  AffineMap map;
  map.matrix = Matrix::Constant(2, 3, 10.0);
  map.frobenius_bound = 1.0;
  CHECK(!map.feasible());
  map.project_to_ball();
  CHECK(map.feasible());
  CHECK(map.matrix.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dyadic integers add, subtract, and compare exactly") {
  // 1/2 scaled by 2^3 = 4; adding 2^1 gives 6; subtracting 2^2 gives 2.
  DyadicInt v = DyadicInt::pow2(2);
  v.add_pow2(1);
  DyadicInt w = DyadicInt::pow2(2);
  CHECK(w < v);
  v.sub_pow2(2);
  CHECK(v < w);
  CHECK(v.to_double(3) == doctest::Approx(0.25));

  // Carries across limb boundaries.
  DyadicInt big = DyadicInt::pow2(63);
  big.add_pow2(63);  // = 2^64
  CHECK(big.to_double(0) == doctest::Approx(std::ldexp(1.0, 64)));
  DyadicInt other = DyadicInt::pow2(64);
  CHECK(big == other);
  big.sub_pow2(0);
  CHECK(big < other);
}
