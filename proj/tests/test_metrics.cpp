#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pwa/metrics.hpp"
#include "pwa/random.hpp"

#include <cmath>
#include <vector>

using namespace pwa;

namespace {

AffineMap map_of(double a, double b) {
  AffineMap m;
  m.matrix = Matrix(1, 2);
  m.matrix << a, b;
  m.frobenius_bound = 10.0;
  return m;
}

}  // namespace

TEST_CASE("match_permutation: identical maps give the identity") {
  std::vector<AffineMap> maps = {map_of(1, 0), map_of(0, 1), map_of(-1, -1)};
  PermutationMatch match = match_permutation(maps, maps);
  CHECK(match.greedy == std::vector<int>{0, 1, 2});
  CHECK(match.assignment == std::vector<int>{0, 1, 2});
  CHECK(match.greedy_cost == doctest::Approx(0.0));
}

TEST_CASE("match_permutation: permuted maps are recovered by assignment") {
  std::vector<AffineMap> truth = {map_of(1, 0), map_of(0, 1), map_of(-1, -1)};
  std::vector<AffineMap> est = {truth[2], truth[0], truth[1]};
  PermutationMatch match = match_permutation(est, truth);
  CHECK(match.assignment == std::vector<int>{2, 0, 1});
  CHECK(match.assignment_cost == doctest::Approx(0.0));
}

TEST_CASE("match_permutation: greedy ties break to the lower index") {
  // One estimate equidistant from both true maps.
  std::vector<AffineMap> truth = {map_of(1, 0), map_of(-1, 0)};
  std::vector<AffineMap> est = {map_of(0, 0), map_of(0, 5)};
  PermutationMatch match = match_permutation(est, truth);
  CHECK(match.greedy[0] == 0);
}

TEST_CASE("covariance spectrum rank cases") {
  const int K = 2;
  Vector xbar(3);
  xbar << 1.0, 2.0, 1.0;

  // Fewer points than the dimension: lambda_min = 0.
  {
    std::vector<Vector> xs = {xbar, 2 * xbar};
    std::vector<int> est = {0, 0}, truth = {0, 0};
    auto spectra = covariance_spectrum(xs, est, truth, K);
    CHECK(spectra[0][0].count == 2);
    CHECK(spectra[0][0].lambda_min == doctest::Approx(0.0).epsilon(1e-10));
  }

  // A single repeated covariate: lambda_min = 0, lambda_max = n * ||x||^2.
  {
    std::vector<Vector> xs(5, xbar);
    std::vector<int> est(5, 1), truth(5, 0);
    auto spectra = covariance_spectrum(xs, est, truth, K);
    CHECK(spectra[1][0].count == 5);
    CHECK(spectra[1][0].lambda_min == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(spectra[1][0].lambda_max ==
          doctest::Approx(5.0 * xbar.squaredNorm()).epsilon(1e-12));
  }

  // Well-spread covariates: lambda_min grows linearly with the count.
  {
    SeededRng rng(3);
    std::vector<Vector> xs;
    std::vector<int> est, truth;
    std::vector<double> ratios;
    for (int n : {200, 400, 800}) {
      xs.clear();
      est.clear();
      truth.clear();
      for (int i = 0; i < n; ++i) {
        xs.push_back(lift(rng.gaussian_vector(2, 1.0)));
        est.push_back(0);
        truth.push_back(0);
      }
      auto spectra = covariance_spectrum(xs, est, truth, 1);
      ratios.push_back(spectra[0][0].lambda_min / n);
    }
    CHECK(ratios[2] > 0.3);
    CHECK(std::abs(ratios[2] - ratios[1]) < 0.25);
  }
}

TEST_CASE("recovery curve slope on exact power laws") {
  // error^2 = c / count gives slope exactly -1.
  std::vector<std::pair<Real, Real>> pts;
  for (double n : {10.0, 20.0, 40.0, 80.0, 160.0})
    pts.emplace_back(n, 3.7 / n);
  CHECK(recovery_curve_slope(pts) == doctest::Approx(-1.0).epsilon(1e-9));

  // Constant error gives slope 0.
  std::vector<std::pair<Real, Real>> flat;
  for (double n : {10.0, 20.0, 40.0, 80.0})
    flat.emplace_back(n, 0.42);
  CHECK(recovery_curve_slope(flat) == doctest::Approx(0.0).epsilon(1e-9));

  //

  std::vector<std::pair<Real, Real>> few = {{10.0, 1.0}, {20.0, 0.5}};
  CHECK_THROWS(recovery_curve_slope(few));
}

TEST_CASE("run report hash is sensitive to content") {
  RunReport a;
  a.seed = 1;
  a.T = 3;
  a.K = 2;
  a.regret_increments = {0.5, 0.25, 0.125};
  a.prediction_errors = {0.5, 0.25, 0.125};
  a.mistake_flags = {1, 0, 0};
  RunReport b = a;
  CHECK(a.deterministic_hash() == b.deterministic_hash());
  b.regret_increments[2] = 0.1250001;
  CHECK(a.deterministic_hash() != b.deterministic_hash());
}

TEST_CASE("run report json round trip fields") {
  RunReport report;
  report.seed = 9;
  report.T = 2;
  report.K = 1;
  report.regret_increments = {1.0, 0.5};
  report.cumulative_regret = {1.0, 1.5};
  report.prediction_errors = {1.0, 0.5};
  report.mistake_flags = {0, 1};
  report.epoch_of_t = {0, 0};
  report.total_regret = 1.5;
  auto j = report.to_json();
  CHECK(j["T"] == 2);
  CHECK(j["deterministic_hash"] == report.deterministic_hash_hex());
  CHECK(j["regret_increments"].size() == 2);
}
