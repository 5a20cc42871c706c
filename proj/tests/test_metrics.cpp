#include "mito/metrics.hpp"

#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"

using namespace mito;

namespace {

// Exhaustive maximum-matching oracle: bitmask DP over the truth set.
int brute_force_matching(const std::vector<Eigen::Vector2d>& pred,
                         const std::vector<Eigen::Vector2d>& truth, double radius) {
  const int nt = int(truth.size());
  std::vector<int> best(std::size_t(1) << nt, -1);
  std::function<int(std::size_t, unsigned)> go = [&](std::size_t i, unsigned used) -> int {
    if (i == pred.size()) return 0;
    int result = go(i + 1, used);  // leave pred i unmatched
    for (int j = 0; j < nt; ++j) {
      if (used & (1u << j)) continue;
      if ((pred[i] - truth[std::size_t(j)]).squaredNorm() <= radius * radius)
        result = std::max(result, 1 + go(i + 1, used | (1u << j)));
    }
    return result;
  };
  return go(0, 0);
}

}  // namespace

TEST_CASE("match_f1 is perfect when predictions equal the truth") {
  std::vector<Eigen::Vector2d> pts = {{10, 10}, {50, 80}, {200, 150}};
  MatchResult r = match_f1(pts, pts, {});
  CHECK(r.f1 == doctest::Approx(1.0));
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(1.0));
}

TEST_CASE("match_f1 conventions for empty inputs") {
  std::vector<Eigen::Vector2d> truth = {{10, 10}};
  MatchResult r = match_f1({}, truth, {});
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);

  MatchResult r2 = match_f1({}, {}, {});
  CHECK(r2.f1 == 0.0);
}

TEST_CASE("match_f1 radius boundary is inclusive") {
  MatchConfig cfg;
  cfg.radius = 30.0;
  std::vector<Eigen::Vector2d> pred = {{0, 0}};
  std::vector<Eigen::Vector2d> truth = {{30, 0}};
  CHECK(match_f1(pred, truth, cfg).matched == 1);
  truth[0] = {30.001, 0};
  CHECK(match_f1(pred, truth, cfg).matched == 0);
}

TEST_CASE("match_f1 equals the exhaustive-matching oracle on random instances") {
  Rng rng(2024);
  MatchConfig cfg;
  cfg.radius = 25.0;
  for (int trial = 0; trial < 100; ++trial) {
    int np = 1 + int(rng.uniform_index(10));
    int nt = 1 + int(rng.uniform_index(10));
    std::vector<Eigen::Vector2d> pred, truth;
    for (int i = 0; i < np; ++i) pred.emplace_back(rng.uniform(0, 120), rng.uniform(0, 120));
    for (int j = 0; j < nt; ++j) truth.emplace_back(rng.uniform(0, 120), rng.uniform(0, 120));
    MatchResult r = match_f1(pred, truth, cfg);
    CHECK(r.matched == brute_force_matching(pred, truth, cfg.radius));
  }
}

TEST_CASE("match_f1 favors the pairing that maximizes cardinality") {
  // greedy nearest-first would match pred0-truth0 and strand pred1
  MatchConfig cfg;
  cfg.radius = 10.0;
  std::vector<Eigen::Vector2d> pred = {{0, 0}, {4, 0}};
  std::vector<Eigen::Vector2d> truth = {{1, 0}, {-6, 0}};
  MatchResult r = match_f1(pred, truth, cfg);
  CHECK(r.matched == 2);
}

TEST_CASE("kappa is 1 for identical non-degenerate raters") {
  std::vector<int> a = {1, 2, 3, 1, 2, 3};
  auto k = kappa_quadratic(a, a);
  REQUIRE(k.has_value());
  CHECK(*k == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kappa matches the hand-computed contingency table") {
  // a=(1,1,2,2,3,3), b=(1,2,1,3,2,3):
  // O = [[1,1,0],[1,0,1],[0,1,1]], marginals all 2, E_ij = 2/3,
  // weights w(|i-j|=1)=1/4, w(2)=1 -> num=1, den=2 -> kappa = 0.5
  std::vector<int> a = {1, 1, 2, 2, 3, 3};
  std::vector<int> b = {1, 2, 1, 3, 2, 3};
  auto k = kappa_quadratic(a, b);
  REQUIRE(k.has_value());
  CHECK(*k == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kappa approaches zero for independent raters with fixed marginals") {
  Rng rng(99);
  std::vector<int> a, b;
  for (int i = 0; i < 30000; ++i) {
    a.push_back(1 + int(rng.uniform_index(3)));
    b.push_back(1 + int(rng.uniform_index(3)));
  }
  auto k = kappa_quadratic(a, b);
  REQUIRE(k.has_value());
  CHECK(std::abs(*k) < 0.05);
}

TEST_CASE("kappa signals degenerate marginals instead of returning a number") {
  std::vector<int> a = {2, 2, 2, 2};
  CHECK_FALSE(kappa_quadratic(a, a).has_value());
}

TEST_CASE("spearman basics") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y = {10, 20, 30, 40, 50};
  CHECK(spearman(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> rev = {50, 40, 30, 20, 10};
  CHECK(spearman(x, rev) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
  Rng rng(5);
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(rng.uniform(0, 10));
    y.push_back(rng.uniform(0, 10));
  }
  double base = spearman(x, y);
  std::vector<double> xt;
  for (double v : x) xt.push_back(std::exp(0.5 * v) + 3.0);
  CHECK(spearman(xt, y) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("spearman handles ties with average ranks") {
  // count-based rank oracle: rank = 1 + #smaller + (#equal - 1)/2
  auto rank_oracle = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      int smaller = 0, equal = 0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j] < v[i]) ++smaller;
        if (v[j] == v[i]) ++equal;
      }
      r[i] = 1.0 + smaller + 0.5 * (equal - 1);
    }
    return r;
  };
  Rng rng(17);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(double(int(rng.uniform_index(6))));  // heavy ties
    y.push_back(double(int(rng.uniform_index(6))));
  }
  if (std::count(x.begin(), x.end(), x[0]) == int(x.size())) x[0] += 1;
  if (std::count(y.begin(), y.end(), y[0]) == int(y.size())) y[0] += 1;

  std::vector<double> rx_oracle = rank_oracle(x);
  std::vector<double> rx = average_ranks(x);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(rx[i] == doctest::Approx(rx_oracle[i]).epsilon(1e-12));

  // full statistic vs oracle ranks through a plain pearson
  auto pearson = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= double(a.size());
    mb /= double(b.size());
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
  };
  CHECK(spearman(x, y) ==
        doctest::Approx(pearson(rank_oracle(x), rank_oracle(y))).epsilon(1e-12));
}

TEST_CASE("spearman rejects degenerate input") {
  std::vector<double> x = {1, 1, 1};
  std::vector<double> y = {1, 2, 3};
  CHECK_THROWS_AS(spearman(x, y), Error);
  CHECK_THROWS_AS(spearman({1.0}, {2.0}), Error);
}

TEST_CASE("sweep_threshold picks the best delta, largest on ties") {
  DetectionList dl;
  dl.entries = {{0, 0, 0.99}, {100, 0, 0.95}, {500, 500, 0.9}};  // last is false positive
  std::vector<Eigen::Vector2d> truth = {{0, 0}, {100, 0}};
  MatchConfig cfg;
  cfg.radius = 10;
  SweepResult r = sweep_threshold(dl, truth, cfg, default_sweep_grid(0.80, 1.00, 0.01));
  // best F1 = 1.0 for delta in (0.90, 0.95]; ties resolve upward
  CHECK(r.best_f1 == doctest::Approx(1.0));
  CHECK(r.best_delta == doctest::Approx(0.95));
  // recall is non-increasing along the curve
  for (std::size_t i = 1; i < r.curve.size(); ++i)
    CHECK(r.curve[i].recall <= r.curve[i - 1].recall + 1e-12);
}

TEST_CASE("sweep_threshold with a single grid point returns it") {
  DetectionList dl;
  dl.entries = {{0, 0, 0.99}};
  std::vector<Eigen::Vector2d> truth = {{0, 0}};
  SweepResult r = sweep_threshold(dl, truth, {}, {0.9});
  CHECK(r.best_delta == 0.9);
  CHECK(r.curve.size() == 1);
}

TEST_CASE("sweep_threshold on detections below the grid scores zero everywhere") {
  DetectionList dl;
  dl.entries = {{0, 0, 0.5}};
  std::vector<Eigen::Vector2d> truth = {{0, 0}};
  SweepResult r = sweep_threshold(dl, truth, {}, default_sweep_grid());
  CHECK(r.best_f1 == 0.0);
  for (const auto& p : r.curve) CHECK(p.f1 == 0.0);
}
