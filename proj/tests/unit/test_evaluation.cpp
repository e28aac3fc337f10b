#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "homoflow/augmentation.hpp"
#include "homoflow/error.hpp"
#include "homoflow/evaluation.hpp"
#include "homoflow/random.hpp"
#include "homoflow/synthetic.hpp"
#include "oracles.hpp"

using namespace homoflow;
namespace fs = std::filesystem;

namespace {

MotionSequence random_sequence(Rng& rng, int steps) {
  MotionSequence s;
  for (int k = 0; k < steps; ++k) {
    FourPointDelta d;
    for (auto& v : d.d) v = {rng.normal(0, 4), rng.normal(0, 4)};
    s.push_back(d);
  }
  return s;
}

// Mean over samples of the mean corner distance, then the two-pass std.
std::pair<double, double> naive_mpd(const std::vector<MotionSequence>& a, const std::vector<MotionSequence>& b) {
  std::vector<double> per;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < a[i].size(); ++k) s += oracle::corner_norm_mean(a[i][k] - b[i][k]);
    per.push_back(s / static_cast<double>(a[i].size()));
  }
  return {oracle::mean(per), oracle::population_std(per)};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("homoflow_eval_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Mpd, MatchesNaiveComputation) {
  Rng rng(1);
  std::vector<MotionSequence> a, b;
  for (int i = 0; i < 50; ++i) {
    a.push_back(random_sequence(rng, 2));
    b.push_back(random_sequence(rng, 2));
  }
  const auto got = mpd(a, b);
  const auto [mean, std] = naive_mpd(a, b);
  EXPECT_NEAR(got.mean, mean, 1e-12);
  EXPECT_NEAR(got.std, std, 1e-12);
}

TEST(Mpd, MetricProperties) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_sequence(rng, 1), b = random_sequence(rng, 1), c = random_sequence(rng, 1);
    EXPECT_EQ(sample_error(a, a), 0.0);
    EXPECT_DOUBLE_EQ(sample_error(a, b), sample_error(b, a));
    EXPECT_LE(sample_error(a, c), sample_error(a, b) + sample_error(b, c) + 1e-12);
  }
}

TEST(Mpd, Errors) {
  EXPECT_THROW(mpd({}, {}), EmptySet);
  const std::vector<MotionSequence> one{{FourPointDelta::zero()}};
  EXPECT_THROW(mpd(one, {}), DimensionMismatch);
}

TEST(CenterDisplacement, TranslationIsScaledByHalfExtent) {
  const FrameGeometry g{101, 51};
  const Vec2 d = center_displacement(FourPointDelta::uniform({10, -5}), g);
  EXPECT_NEAR(d.x(), 0.2, 1e-12);
  EXPECT_NEAR(d.y(), -0.2, 1e-12);
}

TEST(CenterDisplacement, FlipHNegatesX) {
  const FrameGeometry g{128, 96};
  std::mt19937_64 rng(6);
  for (int k = 0; k < 20; ++k) {
    const auto d = four_point_from_matrix(oracle::to_homography(oracle::random_corner_homography(rng, 128, 96, 10)), g);
    const Vec2 a = center_displacement(d, g);
    const Vec2 b = center_displacement(conjugate_motion(d, {GeometricKind::FlipH}, g), g);
    EXPECT_NEAR(b.x(), -a.x(), 1e-12);
    EXPECT_NEAR(b.y(), a.y(), 1e-12);
  }
}

TEST(DominantDirection, AxesSignsAndDeadZone) {
  EXPECT_EQ(dominant_direction({0.3, 0.1}), MotionClass::Right);
  EXPECT_EQ(dominant_direction({-0.3, 0.1}), MotionClass::Left);
  EXPECT_EQ(dominant_direction({0.1, -0.3}), MotionClass::Up);
  EXPECT_EQ(dominant_direction({0.1, 0.3}), MotionClass::Down);
  EXPECT_FALSE(dominant_direction({0.2, 0.2}).has_value());
  EXPECT_FALSE(dominant_direction({5e-4, 0.0}).has_value());
}

TEST(Quartiles, LinearInterpolation) {
  const auto q = quartiles({4, 1, 3, 2, 5});
  EXPECT_DOUBLE_EQ(q.q1, 2.0);
  EXPECT_DOUBLE_EQ(q.median, 3.0);
  EXPECT_DOUBLE_EQ(q.q3, 4.0);
  const auto r = quartiles({0, 10});
  EXPECT_DOUBLE_EQ(r.q1, 2.5);
  EXPECT_DOUBLE_EQ(r.median, 5.0);
  EXPECT_THROW(quartiles({}), EmptySet);
}

TEST(LabelAgreement, CountsPerClass) {
  const std::vector<Vec2> disp{{0.2, 0}, {0.3, 0.1}, {-0.1, 0}, {0, -0.4}, {0, 0}, {0.5, 0}};
  const std::vector<MotionClass> labels{MotionClass::Right, MotionClass::Right, MotionClass::Right,
                                        MotionClass::Up,    MotionClass::Up,    MotionClass::ZoomIn};
  const auto t = label_agreement(disp, labels);
  EXPECT_EQ(t.count, 5u);
  EXPECT_EQ(t.agree, 3u);
  EXPECT_EQ(t.abstain, 1u);
  EXPECT_EQ(t.ignored, 1u);
  ASSERT_NE(t.row(MotionClass::Right), nullptr);
  EXPECT_NEAR(t.row(MotionClass::Right)->agreement, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(t.row(MotionClass::Right)->mean.x(), 0.4 / 3.0, 1e-12);
  EXPECT_EQ(t.row(MotionClass::Left), nullptr);
  EXPECT_THROW(label_agreement(disp, {}), LabelMismatch);
}

TEST(LabelAgreement, NegationOnlyWhenStrictlyBetter) {
  const std::vector<Vec2> disp{{-0.2, 0}, {-0.3, 0}};
  const std::vector<MotionClass> labels{MotionClass::Right, MotionClass::Right};
  EXPECT_EQ(label_agreement(disp, labels).agree, 0u);
  const auto t = label_agreement(disp, labels, true);
  EXPECT_TRUE(t.negated);
  EXPECT_EQ(t.agree, 2u);
  EXPECT_FALSE(label_agreement({{0.2, 0}}, {MotionClass::Right}, true).negated);
}

TEST(Overlay, TruthAlignsBetterThanPerturbation) {
  const Scene scene = generate_scene(8, 512);
  const FrameGeometry geom{96, 96};
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto g = random_homography(s, geom, 8);
    const auto [a, b] = render_pair(scene, g, geom);
    const auto truth = four_point_from_matrix(g, geom);
    Rng rng(s);
    FourPointDelta bad = truth;
    for (auto& v : bad.d) {
      const double angle = rng.uniform(0, 6.283185307179586);
      v += 3.0 * Vec2(std::cos(angle), std::sin(angle));
    }
    EXPECT_LT(overlay_misalignment(a, b, truth), overlay_misalignment(a, b, bad));
    EXPECT_LT(overlay_misalignment(a, b, truth), 0.02);
  }
}

TEST(Overlay, ChannelsCarryWarpedAndCurrent) {
  GrayFrame past(8, 8, 0.0f), current(8, 8, 1.0f);
  past.at(2, 3) = 1.0f;
  const auto img = warp_overlay(past, current, FourPointDelta::uniform({1, 0}));
  EXPECT_EQ(img.px(3, 3)[0], 255);
  EXPECT_EQ(img.px(3, 3)[1], 255);
  EXPECT_EQ(img.px(2, 3)[0], 0);
  EXPECT_EQ(img.px(0, 0)[2], 255);
  // Pixels whose source is off the past frame are black in R and G.
  EXPECT_EQ(img.px(0, 5)[0], 0);
  EXPECT_THROW(warp_overlay(past, GrayFrame(4, 4), FourPointDelta::zero()), DimensionMismatch);
}

TEST(Benchmark, RowsAndSpeedup) {
  int calls_a = 0, calls_b = 0;
  std::vector<NamedEstimator> e{{"a", [&](const std::vector<GrayFrame>&) { ++calls_a; }},
                                {"b", [&](const std::vector<GrayFrame>&) { ++calls_b; }}};
  const auto rows = run_benchmark(e, std::vector<GrayFrame>{}, 3);
  EXPECT_EQ(calls_a, 4);
  EXPECT_EQ(calls_b, 4);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GE(std::max(rows[0].speedup, rows[1].speedup), 1.0);
  EXPECT_DOUBLE_EQ(std::min(rows[0].speedup, rows[1].speedup), 1.0);
  EXPECT_EQ(benchmark_table(rows).substr(0, 6), "method");
  EXPECT_THROW(run_benchmark(e, std::vector<GrayFrame>{}, 1), ParameterOutOfRange);
}

TEST(Evaluate, BaselinesReportAndThreads) {
  const ClipSpec spec{3, 1, 1, 1};
  const auto data = fixture::hand_dataset(spec, 12, [](int t) { return fixture::noise(4, t); },
                                          [](int t) { return FourPointDelta::uniform({double(t), 0.0}); });
  const auto o1 = baseline_predictions(data, 1), o2 = baseline_predictions(data, 2);
  // Linear ramp: O(2) is exact, O(1) is off by one pixel everywhere.
  std::vector<std::optional<MotionClass>> labels(data.size(), MotionClass::Right);
  labels[0] = std::nullopt;
  const MethodPredictions preds{{"taylor_o1", o1}, {"taylor_o2", o2}};
  const auto r1 = evaluate(data, preds, labels, 1);
  const auto r4 = evaluate(data, preds, labels, 4);
  EXPECT_EQ(report_hash(r1), report_hash(r4));
  EXPECT_NEAR(r1.method("taylor_o1").mpd.mean, 1.0, 1e-12);
  EXPECT_NEAR(r1.method("taylor_o2").mpd.mean, 0.0, 1e-12);
  EXPECT_EQ(r1.method("taylor_o1").count, data.size());
  EXPECT_EQ(r1.agreement.at("taylor_o2").count, data.size() - 1);
  EXPECT_THROW(r1.method("oracle"), InvalidInput);
  EXPECT_THROW(baseline_predictions(data, 3), ParameterOutOfRange);
  EXPECT_THROW(evaluate(data, preds, {MotionClass::Up}), LabelMismatch);
  EXPECT_THROW(evaluate(data, {{"x", {}}}, {}), DimensionMismatch);

  const auto dir = scratch("report");
  write_report(dir, r1);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "centers_taylor_o1.svg"));
  std::ifstream csv(dir / "report.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "video_id,start,label,method,error,center_x,center_y");
  fs::remove_all(dir);
}

TEST(Labels, RoundTripAndClipLookup) {
  const auto dir = scratch("labels");
  const LabelTable table{{{"hand", 2}, MotionClass::Left}, {{"hand", 5}, MotionClass::Static}};
  write_labels(dir / "labels.csv", table);
  EXPECT_EQ(read_labels(dir / "labels.csv"), table);

  const ClipSpec spec{3, 1, 1, 1};
  const auto data = fixture::hand_dataset(spec, 8, [](int t) { return fixture::noise(4, t); },
                                          [](int) { return FourPointDelta::zero(); });
  const auto labels = clip_labels(data, table);
  ASSERT_EQ(labels.size(), data.size());
  EXPECT_EQ(labels[0], MotionClass::Left);  // clip 0 recall ends at frame 2
  EXPECT_FALSE(labels[1].has_value());

  std::ofstream(dir / "bad.csv") << "start,label\n";
  EXPECT_THROW(read_labels(dir / "bad.csv"), InvalidInput);
  std::ofstream(dir / "bad2.csv") << "video_id,start_frame,label\nv,x,left\n";
  EXPECT_THROW(read_labels(dir / "bad2.csv"), InvalidInput);
  EXPECT_THROW(read_labels(dir / "missing.csv"), InvalidInput);
  fs::remove_all(dir);
}
