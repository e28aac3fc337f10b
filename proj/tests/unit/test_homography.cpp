#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "homoflow/error.hpp"
#include "homoflow/homography.hpp"
#include "oracles.hpp"

using namespace homoflow;

namespace {

const FrameGeometry kGeom{128, 96};

double max_abs_diff(const FourPointDelta& a, const FourPointDelta& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST(FrameGeometry, CornersAreOrderedClockwiseFromTopLeft) {
  const auto c = kGeom.corners();
  EXPECT_EQ(c[0], Vec2(0, 0));
  EXPECT_EQ(c[1], Vec2(127, 0));
  EXPECT_EQ(c[2], Vec2(127, 95));
  EXPECT_EQ(c[3], Vec2(0, 95));
  EXPECT_EQ(kGeom.center(), Vec2(63.5, 47.5));
}

TEST(Homography, CanonicalScaleHasUnitBottomRight) {
  Mat3 m;
  m << 2, 0, 4, 0, 2, 6, 0, 0, 2;
  const Homography g(m);
  EXPECT_DOUBLE_EQ(g(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(g(0, 2), 2.0);
  EXPECT_FALSE(g.degenerate());
}

TEST(Homography, ZeroBottomRightIsFlaggedDegenerate) {
  Mat3 m;
  m << 0, 1, 1, 1, 0, 0, 1, 1, 0;
  const Homography g(m);
  EXPECT_TRUE(g.degenerate());
  EXPECT_NEAR(g.matrix().norm(), 1.0, 1e-12);
}

TEST(Homography, SingularMatrixThrows) {
  Mat3 m;
  m << 1, 2, 3, 2, 4, 6, 0, 0, 1;
  EXPECT_THROW(Homography{m}, Singular);
}

TEST(Homography, ProjectMatchesLongHand) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto m = oracle::random_corner_homography(rng, kGeom.width, kGeom.height, 20.0);
    const auto g = oracle::to_homography(m);
    const auto [u, v] = oracle::project(m, 17.25, 80.5);
    const Vec2 p = project_point(g, {17.25, 80.5});
    EXPECT_NEAR(p.x(), u, 1e-9);
    EXPECT_NEAR(p.y(), v, 1e-9);
  }
}

TEST(Homography, ProjectionToInfinityThrows) {
  Mat3 m = Mat3::Identity();
  m(2, 0) = -1.0 / 50.0;
  EXPECT_THROW(project_point(Homography(m), {50.0, 3.0}), DegenerateProjection);
}

TEST(FourPoint, TranslationGivesUniformDelta) {
  const auto d = four_point_from_matrix(Homography::translation(3.0, -2.0), kGeom);
  EXPECT_EQ(d, FourPointDelta::uniform({3.0, -2.0}));
}

TEST(FourPoint, MatrixFromFourPointMatchesGaussianElimination) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const auto m = oracle::random_corner_homography(rng, kGeom.width, kGeom.height, 30.0);
    FourPointDelta d;
    const auto src = oracle::corners(kGeom.width, kGeom.height);
    for (int i = 0; i < 4; ++i) {
      const auto [u, v] = oracle::project(m, src[i].first, src[i].second);
      d[i] = {u - src[i].first, v - src[i].second};
    }
    const auto g = matrix_from_four_point(d, kGeom);
    for (int i = 0; i < 9; ++i) EXPECT_NEAR(g.to_array()[i], m[i], 1e-9 * std::max(1.0, std::abs(m[i])));
  }
}

TEST(FourPoint, RoundTripIsExact) {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto g = oracle::to_homography(oracle::random_corner_homography(rng, kGeom.width, kGeom.height, 24.0));
    const auto d = four_point_from_matrix(g, kGeom);
    worst = std::max(worst, max_abs_diff(four_point_from_matrix(matrix_from_four_point(d, kGeom), kGeom), d));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(FourPoint, ScaleInvariance) {
  std::mt19937_64 rng(8);
  const auto m = oracle::random_corner_homography(rng, kGeom.width, kGeom.height, 15.0);
  const auto g = oracle::to_homography(m);
  for (double lambda : {-3.0, -0.5, 0.25, 7.0}) {
    auto s = m;
    for (auto& v : s) v *= lambda;
    EXPECT_LE(max_abs_diff(four_point_from_matrix(oracle::to_homography(s), kGeom), four_point_from_matrix(g, kGeom)),
              1e-10);
  }
}

TEST(FourPoint, CollapsedCornersAreDegenerate) {
  FourPointDelta d;
  d[1] = {-127.0, 0.0};  // TR onto TL
  EXPECT_THROW(matrix_from_four_point(d, kGeom), DegenerateConfiguration);
}

TEST(FourPoint, BackwardNegates) {
  const auto d = FourPointDelta::uniform({1.5, -2.0});
  EXPECT_EQ(d.backward(), FourPointDelta::uniform({-1.5, 2.0}));
}

TEST(FourPoint, FromArrayRejectsNonFinite) {
  std::array<double, 8> v{};
  v[3] = std::nan("");
  EXPECT_THROW(FourPointDelta::from_array(v), InvalidInput);
}

TEST(FourPoint, ArrayOrderIsCornerMajor) {
  const std::array<double, 8> v{1, 2, 3, 4, 5, 6, 7, 8};
  const auto d = FourPointDelta::from_array(v);
  EXPECT_EQ(d[2], Vec2(5, 6));
  EXPECT_EQ(d.to_array(), v);
}

TEST(Compose, MatchesMatrixProductAndAssociates) {
  std::mt19937_64 rng(21);
  const auto a = oracle::random_corner_homography(rng, 128, 96, 10.0);
  const auto b = oracle::random_corner_homography(rng, 128, 96, 10.0);
  const auto c = oracle::random_corner_homography(rng, 128, 96, 10.0);
  const auto ab = oracle::scaled(oracle::multiply(a, b));
  const auto got = compose(oracle::to_homography(a), oracle::to_homography(b)).to_array();
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(got[i], ab[i], 1e-12 * std::max(1.0, std::abs(ab[i])));

  const auto A = oracle::to_homography(a), B = oracle::to_homography(b), C = oracle::to_homography(c);
  const auto left = compose(compose(A, B), C), right = compose(A, compose(B, C));
  for (const Vec2& p : {Vec2(0, 0), Vec2(40, 70), Vec2(127, 95)})
    EXPECT_LE((project_point(left, p) - project_point(right, p)).norm(), 1e-10);
}

TEST(Invert, ComposesToIdentity) {
  std::mt19937_64 rng(2);
  const auto g = oracle::to_homography(oracle::random_corner_homography(rng, 128, 96, 20.0));
  const auto id = compose(g, invert(g));
  EXPECT_LE((id.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dlt, RecoversExactHomographyFromManyPoints) {
  std::mt19937_64 rng(4);
  const auto m = oracle::random_corner_homography(rng, 128, 96, 20.0);
  std::uniform_real_distribution<double> ux(0, 127), uy(0, 95);
  std::vector<Vec2> src, dst;
  for (int i = 0; i < 40; ++i) {
    const double x = ux(rng), y = uy(rng);
    const auto [u, v] = oracle::project(m, x, y);
    src.emplace_back(x, y);
    dst.emplace_back(u, v);
  }
  const auto g = fit_homography_dlt(src, dst);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(g.to_array()[i], m[i], 1e-8 * std::max(1.0, std::abs(m[i])));
}

TEST(Dlt, CollinearPointsAreRankDeficient) {
  std::vector<Vec2> src, dst;
  for (int i = 0; i < 10; ++i) {
    src.emplace_back(i, 2.0 * i);
    dst.emplace_back(i + 1.0, 2.0 * i);
  }
  EXPECT_THROW(fit_homography_dlt(src, dst), DegenerateConfiguration);
}

TEST(Dlt, FewerThanFourPointsThrows) {
  std::vector<Vec2> src{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_THROW(fit_homography_dlt(src, src), DegenerateConfiguration);
}
