#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "homoflow/error.hpp"
#include "homoflow/motion_classify.hpp"
#include "homoflow/random.hpp"

using namespace homoflow;

namespace {

const FrameGeometry kGeom{128, 128};

// Motion about the frame centre: translation t, scale s, rotation theta
// (positive = counter-clockwise on a y-down screen).
FourPointDelta similarity(const Vec2& t, double s, double theta) {
  const Vec2 c = kGeom.center();
  FourPointDelta d;
  const auto corners = kGeom.corners();
  for (int i = 0; i < 4; ++i) {
    const Vec2 r = corners[i] - c;
    // y-down: a visual ccw turn is the standard rotation with -theta.
    const double ct = std::cos(-theta), st = std::sin(-theta);
    const Vec2 rr(ct * r.x() - st * r.y(), st * r.x() + ct * r.y());
    d[i] = c + s * rr + t - corners[i];
  }
  return d;
}

FourPointDelta mirror(const FourPointDelta& d) {
  FourPointDelta m;
  const int partner[4] = {1, 0, 3, 2};
  for (int i = 0; i < 4; ++i) m[i] = {-d[partner[i]].x(), d[partner[i]].y()};
  return m;
}

}  // namespace

TEST(Classify, PureTranslations) {
  EXPECT_EQ(classify(FourPointDelta::uniform({5, 0}), 1.0, kGeom), MotionClass::Right);
  EXPECT_EQ(classify(FourPointDelta::uniform({-5, 1}), 1.0, kGeom), MotionClass::Left);
  EXPECT_EQ(classify(FourPointDelta::uniform({1, -5}), 1.0, kGeom), MotionClass::Up);
  EXPECT_EQ(classify(FourPointDelta::uniform({0, 5}), 1.0, kGeom), MotionClass::Down);
}

TEST(Classify, ZoomAndRotation) {
  EXPECT_EQ(classify(similarity({0, 0}, 1.1, 0), 1.0, kGeom), MotionClass::ZoomOut);
  EXPECT_EQ(classify(similarity({0, 0}, 0.9, 0), 1.0, kGeom), MotionClass::ZoomIn);
  EXPECT_EQ(classify(similarity({0, 0}, 1.0, 0.1), 1.0, kGeom), MotionClass::RotateLeft);
  EXPECT_EQ(classify(similarity({0, 0}, 1.0, -0.1), 1.0, kGeom), MotionClass::RotateRight);
}

TEST(Classify, DiagonalTranslationIsMixed) {
  EXPECT_EQ(classify(FourPointDelta::uniform({5, 5}), 1.0, kGeom), MotionClass::Mixed);
}

TEST(Classify, BelowSigmaIsStatic) {
  EXPECT_EQ(classify(FourPointDelta::uniform({0.5, 0}), 1.0, kGeom), MotionClass::Static);
}

TEST(Classify, ShrinkingBelowSigmaForcesStatic) {
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    FourPointDelta d;
    for (auto& v : d.d) v = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const double sigma = rng.uniform(0.5, 3.0);
    const double alpha = 0.999 * sigma / motion_magnitude(d);
    EXPECT_EQ(classify(d * alpha, sigma, kGeom), MotionClass::Static);
  }
}

TEST(Classify, MirrorEquivariance) {
  Rng rng(2);
  for (int k = 0; k < 20000; ++k) {
    FourPointDelta d;
    for (auto& v : d.d) v = {rng.uniform(-6, 6), rng.uniform(-6, 6)};
    EXPECT_EQ(classify(mirror(d), 1.0, kGeom), mirror_class(classify(d, 1.0, kGeom)));
  }
}

TEST(Classify, MirrorEquivarianceOnPureClasses) {
  for (const auto& d : {FourPointDelta::uniform({4, 0}), FourPointDelta::uniform({-4, 0}),
                        FourPointDelta::uniform({0, 4}), FourPointDelta::uniform({0, -4}),
                        similarity({0, 0}, 1.1, 0), similarity({0, 0}, 0.9, 0), similarity({0, 0}, 1, 0.1),
                        similarity({0, 0}, 1, -0.1)}) {
    const auto c = classify(d, 1.0, kGeom);
    ASSERT_NE(c, MotionClass::Mixed);
    EXPECT_EQ(classify(mirror(d), 1.0, kGeom), mirror_class(c));
  }
}

TEST(Classify, IsTotal) {
  Rng rng(3);
  std::array<std::size_t, kMotionClassCount> seen{};
  for (int k = 0; k < 1000000; ++k) {
    FourPointDelta d;
    for (auto& v : d.d) v = {rng.normal(0, 5), rng.normal(0, 5)};
    const auto c = classify(d, 2.0, kGeom);
    ASSERT_LT(static_cast<std::size_t>(c), kMotionClassCount);
    ++seen[static_cast<std::size_t>(c)];
  }
  std::size_t total = 0;
  for (auto s : seen) total += s;
  EXPECT_EQ(total, 1000000u);
}

TEST(MotionClass, NamesRoundTrip) {
  for (auto c : kAllMotionClasses) EXPECT_EQ(motion_class_from_string(to_string(c)), c);
  EXPECT_THROW(motion_class_from_string("sideways"), InvalidInput);
}

TEST(MotionClass, MirrorIsAnInvolution) {
  for (auto c : kAllMotionClasses) EXPECT_EQ(mirror_class(mirror_class(c)), c);
  EXPECT_EQ(mirror_class(MotionClass::Up), MotionClass::Up);
  EXPECT_EQ(mirror_class(MotionClass::Left), MotionClass::Right);
}

TEST(Distribution, CountsAndMissing) {
  MotionTrack t;
  t.geometry = kGeom;
  t.entries = {FourPointDelta::uniform({5, 0}), std::nullopt, FourPointDelta::uniform({5, 0}),
               FourPointDelta::zero(), FourPointDelta::uniform({0, -5})};
  const auto dist = distribution(t, 1.0, kGeom);
  EXPECT_EQ(dist.total, 4u);
  EXPECT_EQ(dist.missing, 1u);
  EXPECT_EQ(dist.count(MotionClass::Right), 2u);
  EXPECT_EQ(dist.count(MotionClass::Static), 1u);
  EXPECT_EQ(dist.count(MotionClass::Up), 1u);
  EXPECT_DOUBLE_EQ(dist.fraction(MotionClass::Right), 0.5);
  EXPECT_NE(dist.to_json().find("\"right\""), std::string::npos);
  EXPECT_EQ(dist.to_csv().substr(0, 20), "class,count,fraction");
  EXPECT_NE(dist.to_svg().find("<svg"), std::string::npos);
}

TEST(Distribution, EmptyTrackThrows) {
  MotionTrack t;
  t.entries = {std::nullopt, std::nullopt};
  EXPECT_THROW(distribution(t, 1.0, kGeom), EmptyTrack);
}
