#include "mito/stain.hpp"

#include <Eigen/Dense>

#include "doctest.h"
#include "helpers.hpp"

using namespace mito;

TEST_CASE("normalize_stain_matrix keeps the identity fixed") {
  StainMatrix m = StainMatrix::normalized(Eigen::Matrix3d::Identity());
  CHECK((m.rows() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("normalize_stain_matrix divides the hematoxylin OD vector by its length") {
  Eigen::Matrix3d raw;
  raw << 0.18, 0.20, 0.08,   // measured hematoxylin OD per RGB channel
         0.07, 0.99, 0.11,
         0.27, 0.57, 0.78;
  StainMatrix m = StainMatrix::normalized(raw);

  // independent oracle: explicit norm computation
  double n = std::sqrt(0.18 * 0.18 + 0.20 * 0.20 + 0.08 * 0.08);
  CHECK(m.rows()(0, 0) == doctest::Approx(0.18 / n).epsilon(1e-12));
  CHECK(m.rows()(0, 1) == doctest::Approx(0.20 / n).epsilon(1e-12));
  CHECK(m.rows()(0, 2) == doctest::Approx(0.08 / n).epsilon(1e-12));
  for (int r = 0; r < 3; ++r) CHECK(m.rows().row(r).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("normalize_stain_matrix rejects degenerate bases") {
  Eigen::Matrix3d zero_row;
  zero_row << 1, 0, 0, 0, 0, 0, 0, 0, 1;
  CHECK_THROWS_WITH_AS(StainMatrix::normalized(zero_row), doctest::Contains("zero row"), Error);

  Eigen::Matrix3d parallel;
  parallel << 1, 0, 0, 2, 0, 0, 0, 0, 1;
  CHECK_THROWS_AS(StainMatrix::normalized(parallel), Error);
}

TEST_CASE("rgb_to_hed maps white to zero optical density") {
  const StainMatrix& m = StainMatrix::ruifrok_hed();
  ImageF white = test::flat_patch(4, 4, 1.f, 1.f, 1.f);
  ImageF hed = rgb_to_hed(white, m);
  double bound = std::abs(std::log(1.0 + kStainEps)) * m.inverse().cwiseAbs().maxCoeff() * 3;
  for (int c = 0; c < 3; ++c) CHECK(std::abs(hed.at(0, 0, c)) <= bound + 1e-7);
}

TEST_CASE("rgb_to_hed recovers constructed stain amounts") {
  const StainMatrix& m = StainMatrix::ruifrok_hed();

  // independent oracle: solve y = x*M for x with a QR solve on the row basis
  auto solve_amounts = [&](const Eigen::Vector3d& od) {
    return Eigen::Vector3d(m.rows().transpose().colPivHouseholderQr().solve(od));
  };

  SUBCASE("pure hematoxylin pixel") {
    Eigen::Vector3d od = m.rows().row(0);
    ImageF p(1, 1, 3);
    for (int c = 0; c < 3; ++c) p.at(0, 0, c) = float(std::exp(-od(c)));
    ImageF hed = rgb_to_hed(p, m);
    Eigen::Vector3d expected = solve_amounts(od);
    CHECK(expected.isApprox(Eigen::Vector3d(1, 0, 0), 1e-9));
    CHECK(hed.at(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(hed.at(0, 0, 1)) < 1e-4);
    CHECK(std::abs(hed.at(0, 0, 2)) < 1e-4);
  }

  SUBCASE("hematoxylin plus double eosin") {
    Eigen::Vector3d od = m.rows().row(0) + 2.0 * m.rows().row(1);
    ImageF p(1, 1, 3);
    for (int c = 0; c < 3; ++c) p.at(0, 0, c) = float(std::exp(-od(c)));
    ImageF hed = rgb_to_hed(p, m);
    Eigen::Vector3d expected = solve_amounts(od);
    CHECK(expected.isApprox(Eigen::Vector3d(1, 2, 0), 1e-9));
    CHECK(hed.at(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(hed.at(0, 0, 1) == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(std::abs(hed.at(0, 0, 2)) < 1e-4);
  }
}

TEST_CASE("hed_to_rgb of zero concentrations is white minus eps") {
  ImageF zero(3, 3, 3);
  ImageF rgb = hed_to_rgb(zero, StainMatrix::ruifrok_hed());
  CHECK(rgb.at(1, 1, 0) == doctest::Approx(1.0 - kStainEps).epsilon(1e-9));
}

TEST_CASE("hed_to_rgb clips saturated concentrations to the gamut") {
  ImageF heavy = test::flat_patch(2, 2, 10.f, 10.f, 10.f);
  ImageF rgb = hed_to_rgb(heavy, StainMatrix::ruifrok_hed());
  for (int c = 0; c < 3; ++c) {
    CHECK(rgb.at(0, 0, c) >= 0.f);
    CHECK(rgb.at(0, 0, c) < 0.02f);
  }
}

TEST_CASE("roundtrip through HED space is lossless within 1e-4") {
  Rng rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    ImageF p = test::random_patch(16, 16, rng, 0.01f, 1.0f);
    ImageF back = hed_to_rgb(rgb_to_hed(p, StainMatrix::ruifrok_hed()),
                             StainMatrix::ruifrok_hed());
    CHECK(test::max_abs_diff(p, back) < 1e-4);
  }
}

TEST_CASE("optical density composes linearly") {
  const StainMatrix& m = StainMatrix::ruifrok_hed();
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    double a = rng.uniform(0.0, 3.0), b = rng.uniform(0.0, 3.0), c = rng.uniform(0.0, 3.0);
    Eigen::Vector3d od = a * m.rows().row(0) + b * m.rows().row(1) + c * m.rows().row(2);
    ImageF p(1, 1, 3);
    bool in_gamut = true;
    for (int ch = 0; ch < 3; ++ch) {
      double v = std::exp(-od(ch));
      if (v < 1e-3) in_gamut = false;
      p.at(0, 0, ch) = float(v);
    }
    if (!in_gamut) continue;
    ImageF hed = rgb_to_hed(p, m);
    CHECK(std::abs(hed.at(0, 0, 0) - a) < 1e-4 + 1e-4 * a);
    CHECK(std::abs(hed.at(0, 0, 1) - b) < 1e-4 + 1e-4 * b);
    CHECK(std::abs(hed.at(0, 0, 2) - c) < 1e-4 + 1e-4 * c);
  }
}

TEST_CASE("more hematoxylin darkens every absorbing channel") {
  const StainMatrix& m = StainMatrix::ruifrok_hed();
  ImageF low = test::flat_patch(1, 1, 0.5f, 0.4f, 0.7f);
  ImageF hed = rgb_to_hed(low, m);
  ImageF more = hed;
  more.at(0, 0, 0) += 0.5f;
  ImageF a = hed_to_rgb(hed, m);
  ImageF b = hed_to_rgb(more, m);
  for (int c = 0; c < 3; ++c) {
    REQUIRE(m.rows()(0, c) > 0.0);
    CHECK(b.at(0, 0, c) < a.at(0, 0, c));
  }
}

TEST_CASE("stain_augment with sigma 0 is the roundtrip identity") {
  Rng rng(3);
  ImageF p = test::random_patch(12, 12, rng, 0.05f, 0.95f);
  StainAugmentParams params;
  params.sigma = 0.0;
  Rng aug_rng(11);
  ImageF out = stain_augment(p, params, aug_rng);
  CHECK(test::max_abs_diff(p, out) < 1e-4);
}

TEST_CASE("stain_augment is reproducible for a fixed seed") {
  Rng rng(5);
  ImageF p = test::random_patch(16, 16, rng, 0.05f, 0.95f);
  StainAugmentParams params;
  Rng r1(99), r2(99);
  ImageF a = stain_augment(p, params, r1);
  ImageF b = stain_augment(p, params, r2);
  CHECK(test::images_identical(a, b));

  Rng r3(100);
  ImageF c = stain_augment(p, params, r3);
  CHECK(test::max_abs_diff(a, c) > 0.0);
}

TEST_CASE("stain_augment alpha draws follow the uniform distribution") {
  Rng rng(1234);
  StainAugmentParams params;  // sigma 0.05
  double sum = 0.0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) sum += rng.uniform(params.alpha_min(), params.alpha_max());
  double mean = sum / n;
  CHECK(mean > 0.99);
  CHECK(mean < 1.01);
}

TEST_CASE("stain_augment respects per-channel enable flags") {
  Rng rng(8);
  ImageF p = test::random_patch(8, 8, rng, 0.1f, 0.9f);
  StainAugmentParams params;
  params.sigma = 0.3;
  params.enable_h = false;
  params.enable_e = false;
  params.enable_d = false;
  Rng aug_rng(21);
  ImageF out = stain_augment(p, params, aug_rng);
  CHECK(test::max_abs_diff(p, out) < 1e-4);  // all channels frozen -> roundtrip only
}
