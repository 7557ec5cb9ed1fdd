#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pwa/random.hpp"
#include "pwa/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace pwa;

namespace {

// 1-D optimal transport oracle: sorted matching.
double sorted_matching_w2(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    total += (a[i] - b[i]) * (a[i] - b[i]);
  return total / static_cast<double>(a.size());
}

Eigen::MatrixXd column(const std::vector<double>& v) {
  Eigen::MatrixXd m(static_cast<int>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<int>(i), 0) = v[i];
  return m;
}

}  // namespace

TEST_CASE("identical sample sets have zero distance") {
  SeededRng rng(3);
  Eigen::MatrixXd a(8, 3);
  for (int i = 0; i < 8; ++i)
    a.row(i) = rng.gaussian_vector(3, 1.0).transpose();
  CHECK(wasserstein2_empirical(a, a) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("two-point example") {
  Eigen::MatrixXd a(2, 1), b(2, 1);
  a << 0, 0;
  b << 1, 1;
  CHECK(wasserstein2_empirical(a, b) == doctest::Approx(1.0));
}

TEST_CASE("1-D assignment equals the sorted-matching value") {
  SeededRng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(256));
    std::vector<double> a(static_cast<std::size_t>(n)),
        b(static_cast<std::size_t>(n));
    for (auto& v : a) v = rng.gaussian() * 2.0;
    for (auto& v : b) v = rng.gaussian() * 2.0 + rng.uniform(-1.0, 1.0);
    const double assignment = wasserstein2_empirical(column(a), column(b));
    const double oracle = sorted_matching_w2(a, b);
    CHECK(assignment == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("permutation invariance in each sample set") {
  SeededRng rng(23);
  const int n = 32, q = 4;
  Eigen::MatrixXd a(n, q), b(n, q);
  for (int i = 0; i < n; ++i) {
    a.row(i) = rng.gaussian_vector(q, 1.0).transpose();
    b.row(i) = rng.gaussian_vector(q, 1.0).transpose();
  }
  const double base = wasserstein2_empirical(a, b);
  // Shuffle rows of both.
  Eigen::MatrixXd a2 = a, b2 = b;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_index(i + 1));
    a2.row(i).swap(a2.row(j));
    const int k = static_cast<int>(rng.uniform_index(i + 1));
    b2.row(i).swap(b2.row(k));
  }
  CHECK(wasserstein2_empirical(a2, b2) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("triangle inequality on sqrt(W2)") {
  SeededRng rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 16, q = 2;
    Eigen::MatrixXd a(n, q), b(n, q), c(n, q);
    for (int i = 0; i < n; ++i) {
      a.row(i) = rng.gaussian_vector(q, 1.0).transpose();
      b.row(i) = (rng.gaussian_vector(q, 1.0).array() + 0.5).transpose();
      c.row(i) = (rng.gaussian_vector(q, 2.0).array() - 0.3).transpose();
    }
    const double ab = std::sqrt(wasserstein2_empirical(a, b));
    const double bc = std::sqrt(wasserstein2_empirical(b, c));
    const double ac = std::sqrt(wasserstein2_empirical(a, c));
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("coupled estimate dominates the assignment estimate") {
  SeededRng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 24, q = 3;
    Eigen::MatrixXd a(n, q), b(n, q);
    for (int i = 0; i < n; ++i) {
      a.row(i) = rng.gaussian_vector(q, 1.0).transpose();
      b.row(i) = rng.gaussian_vector(q, 1.0).transpose();
    }
    CHECK(wasserstein2_coupled(a, b) >=
          wasserstein2_empirical(a, b) - 1e-9);
  }
}

TEST_CASE("input validation") {
  Eigen::MatrixXd a(2, 1), b(3, 1);
  a.setZero();
  b.setZero();
  CHECK_THROWS(wasserstein2_empirical(a, b));
  Eigen::MatrixXd big(513, 1);
  big.setZero();
  CHECK_THROWS(wasserstein2_empirical(big, big));
}

TEST_CASE("assignment solver minimizes over explicit permutations") {
  SeededRng rng(41);
  // Brute-force all 4! permutations as the oracle.
  const int n = 4;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = rng.uniform(0.0, 10.0);
    std::vector<int> perm{0, 1, 2, 3};
    double best = 1e300;
    do {
      double c = 0.0;
      for (int i = 0; i < n; ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto solved = solve_assignment(cost);
    CHECK(assignment_cost(cost, solved) == doctest::Approx(best).epsilon(1e-12));
  }
}
