#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "homoflow/error.hpp"
#include "homoflow/evaluation.hpp"
#include "homoflow/predictor.hpp"
#include "homoflow/random.hpp"
#include "oracles.hpp"

using namespace homoflow;

namespace {

// Brightness ramp that rises towards +x, with a little per-frame noise.
GrayFrame ramp_frame(int t) {
  Rng rng(static_cast<std::uint64_t>(t));
  GrayFrame f(6, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) f.at(x, y) = static_cast<float>(x / 5.0 * 0.8 + 0.1 + rng.uniform(-0.05, 0.05));
  return f;
}

}  // namespace

TEST(Taylor, FirstOrderHoldsLastMotion) {
  const std::vector<FourPointDelta> r{FourPointDelta::uniform({1, 0}), FourPointDelta::uniform({2, 1})};
  const auto p = taylor_o1(r, 3);
  ASSERT_EQ(p.size(), 3u);
  for (const auto& d : p) EXPECT_EQ(d, FourPointDelta::uniform({2, 1}));
}

TEST(Taylor, SecondOrderExtrapolatesLinearly) {
  const std::vector<FourPointDelta> r{FourPointDelta::uniform({1, 0}), FourPointDelta::uniform({3, -1})};
  const auto p = taylor_o2(r, 2);
  EXPECT_EQ(p[0], FourPointDelta::uniform({5, -2}));
  EXPECT_EQ(p[1], FourPointDelta::uniform({7, -3}));
}

TEST(Taylor, MissingHistoryThrows) {
  EXPECT_THROW(taylor_o1({}, 1), MissingHistory);
  const std::vector<FourPointDelta> one{FourPointDelta::zero()};
  EXPECT_THROW(taylor_o2(one, 1), MissingHistory);
}

TEST(Model, InitializationIsSeededGlorot) {
  const Architecture arch{2, 1, 4, {5}};
  const auto a = PredictorModel::initialize(arch, 3);
  EXPECT_EQ(a, PredictorModel::initialize(arch, 3));
  EXPECT_FALSE(a == PredictorModel::initialize(arch, 4));
  ASSERT_EQ(a.weights.size(), 2u);
  EXPECT_EQ(a.weights[0].rows(), 5);
  EXPECT_EQ(a.weights[0].cols(), 32);
  EXPECT_EQ(a.weights[1].rows(), 8);
  EXPECT_LE(a.weights[0].cwiseAbs().maxCoeff(), std::sqrt(6.0 / 37.0));
  EXPECT_EQ(a.parameter_count(), 32u * 5 + 5 + 5 * 8 + 8);
  EXPECT_NO_THROW(a.validate());
}

TEST(Model, ForwardMatchesHandComputation) {
  // Two 1x1 frames, one tanh unit, eight outputs.
  const Architecture arch{2, 1, 1, {1}};
  auto m = PredictorModel::initialize(arch, 0);
  m.weights[0] << 0.5, -1.0;
  m.biases[0] << 0.25;
  for (int i = 0; i < 8; ++i) {
    m.weights[1](i, 0) = i + 1;
    m.biases[1](i) = -i;
    m.target_mean(i) = 10.0;
    m.target_scale(i) = 2.0;
  }
  Eigen::VectorXd x(2);
  x << 0.3, -0.2;
  const double h = std::tanh(0.5 * 0.3 - 1.0 * -0.2 + 0.25);
  const auto out = pack_motions(forward(m, x));
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(out(i), 10.0 + 2.0 * ((i + 1) * h - i), 1e-12);
}

TEST(Model, ForwardChecksInputShape) {
  const auto m = PredictorModel::initialize({2, 1, 4, {3}}, 0);
  PredictorInput in;
  in.recall_frames = {GrayFrame(4, 4)};
  EXPECT_THROW(forward(m, in), DimensionMismatch);
  in.recall_frames = {GrayFrame(4, 4), GrayFrame(5, 5)};
  EXPECT_THROW(forward(m, in), DimensionMismatch);
  in.recall_frames = {GrayFrame(4, 4), GrayFrame(4, 4)};
  EXPECT_EQ(forward(m, in).size(), 1u);
}

TEST(Model, JsonRoundTripIsExact) {
  const auto m = gradcheck::random_model(5, {3, 2, 2, {4, 3}});
  EXPECT_EQ(model_from_json(model_to_json(m)), m);
  const auto path = std::filesystem::temp_directory_path() / "homoflow_model_test.json";
  save_model(path, m);
  EXPECT_EQ(load_model(path), m);
  std::filesystem::remove(path);
}

TEST(Model, CorruptJsonIsRejected) {
  auto text = model_to_json(gradcheck::random_model(1, {2, 1, 2, {3}}));
  EXPECT_ANY_THROW(model_from_json(text.substr(0, text.size() / 2)));
}

TEST(Loss, MatchesDefinition) {
  const MotionSequence pred{FourPointDelta::uniform({3, 4})};
  const MotionSequence target{FourPointDelta::zero()};
  EXPECT_DOUBLE_EQ(loss(pred, target, 0.0), 5.0);
  EXPECT_DOUBLE_EQ(loss(pred, target, 0.1), 5.5);
  EXPECT_DOUBLE_EQ(loss(target, target, 1.0), 0.0);
  EXPECT_THROW(loss(pred, {}, 0.0), DimensionMismatch);
}

TEST(Gradient, MatchesFiniteDifferences) {
  for (std::uint64_t draw = 0; draw < 10; ++draw) {
    const auto arch = gradcheck::draw_architecture(draw);
    const auto model = gradcheck::random_model(draw, arch);
    const auto batch = gradcheck::random_batch(draw + 50, arch, 4);
    const double lambda = 0.1 * static_cast<double>(draw % 4);
    const auto analytic = gradient(model, batch, lambda);
    EXPECT_LE(gradcheck::relative_error(analytic, gradcheck::numeric_gradient(model, batch, lambda)), 1e-4)
        << "draw " << draw;
  }
}

TEST(TrainConfig, ValidationAndSchedule) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.lr_drops = {{5, 0.1}, {8, 0.5}};
  EXPECT_DOUBLE_EQ(cfg.lr_at(4), 1e-3);
  EXPECT_DOUBLE_EQ(cfg.lr_at(5), 1e-4);
  EXPECT_DOUBLE_EQ(cfg.lr_at(9), 5e-5);
  using Mutation = void (*)(TrainConfig&);
  const Mutation mutations[] = {[](TrainConfig& c) { c.epochs = 0; }, [](TrainConfig& c) { c.optimizer = "rmsprop"; },
                                [](TrainConfig& c) { c.momentum = 1.0; }, [](TrainConfig& c) { c.lambda = -1; }};
  for (Mutation bad : mutations) {
    TrainConfig c;
    bad(c);
    EXPECT_THROW(c.validate(), ParameterOutOfRange);
  }
}

TEST(TrainConfig, JsonRoundTrip) {
  TrainConfig cfg;
  cfg.epochs = 7;
  cfg.optimizer = "sgd";
  cfg.momentum = 0.5;
  cfg.lr_drops = {{3, 0.5}};
  cfg.hidden = {16, 8};
  cfg.augmentation = {true, true, 9};
  const auto back = train_config_from_json(train_config_to_json(cfg));
  EXPECT_EQ(train_config_to_json(back), train_config_to_json(cfg));
  EXPECT_EQ(back.hidden, cfg.hidden);
  EXPECT_EQ(back.momentum, 0.5);
  EXPECT_TRUE(back.augmentation.photometric);
}

TEST(Train, DeterministicAndThreadIndependent) {
  const ClipSpec spec{3, 1, 1, 1};
  const auto data = fixture::hand_dataset(spec, 40, [](int t) { return fixture::noise(4, t); },
                                          [](int t) { return FourPointDelta::uniform({std::sin(t), 1.0}); });
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.hidden = {6};
  cfg.augmentation = {true, true, 2};
  const auto a = train(data, {}, cfg);
  cfg.threads = 4;
  const auto b = train(data, {}, cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(loss_log_csv(a.log), loss_log_csv(b.log));
  cfg.seed = 1;
  EXPECT_FALSE(train(data, {}, cfg).model == a.model);
}

TEST(Train, SingleSampleLossNeverIncreases) {
  const ClipSpec spec{2, 1, 1, 1};
  const auto data = fixture::hand_dataset(spec, 3, [](int t) { return fixture::noise(3, t); },
                                          [](int) { return FourPointDelta::uniform({4.0, -2.0}); });
  ASSERT_EQ(data.size(), 1u);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.optimizer = "sgd";
  cfg.momentum = 0.0;
  cfg.learning_rate = 1e-3;
  cfg.hidden = {4};
  const auto r = train(data, {}, cfg);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& e : r.log) {
    if (e.split != "train") continue;
    EXPECT_LE(e.loss, prev + 1e-12) << "epoch " << e.epoch;
    prev = e.loss;
  }
}

TEST(Train, LargeLambdaShrinksPredictions) {
  const ClipSpec spec{2, 1, 1, 1};
  const auto data = fixture::hand_dataset(spec, 30, [](int t) { return fixture::noise(3, t); },
                                          [](int t) { return FourPointDelta::uniform({5.0 + std::sin(t), 2.0}); });
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.batch_size = 8;
  cfg.learning_rate = 5e-2;
  cfg.hidden = {4};
  auto mean_norm = [&](const PredictorModel& m) {
    double s = 0.0;
    for (const auto& p : predict_clips(m, data)) s += oracle::corner_norm_mean(p[0]);
    return s / static_cast<double>(data.size());
  };
  cfg.lambda = 0.0;
  const double free_norm = mean_norm(train(data, {}, cfg).model);
  cfg.lambda = 5.0;
  const double shrunk = mean_norm(train(data, {}, cfg).model);
  EXPECT_GT(free_norm, 3.0);
  EXPECT_LT(shrunk, 0.2 * free_norm);
}

TEST(Train, ZeroTargetsDriveOutputsToZero) {
  const ClipSpec spec{2, 1, 1, 1};
  const auto data = fixture::hand_dataset(spec, 30, [](int t) { return fixture::noise(3, t); },
                                          [](int) { return FourPointDelta::zero(); });
  TrainConfig cfg;
  cfg.epochs = 80;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-2;
  cfg.lambda = 0.0;
  cfg.hidden = {4};
  const auto initial = predict_clips(PredictorModel::initialize({2, 1, 3, {4}}, 0), data);
  const auto trained = predict_clips(train(data, {}, cfg).model, data);
  const std::vector<MotionSequence> zeros(data.size(), MotionSequence{FourPointDelta::zero()});
  EXPECT_LT(mpd(trained, zeros).mean, 0.1 * mpd(initial, zeros).mean);
}

TEST(Train, GeometricAugmentationMirrorsPredictions) {
  // Right-only motion; the ramp orientation tells the network which way the
  // augmented copy moves.
  const ClipSpec spec{2, 1, 1, 1};
  const auto data = fixture::hand_dataset(spec, 80, ramp_frame, [](int) { return FourPointDelta::uniform({4.0, 0.0}); },
                                          {6, 6});
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-2;
  cfg.lambda = 0.0;
  cfg.hidden = {8};
  cfg.augmentation = {true, false, 3};
  const auto model = train(data, {}, cfg).model;

  const GeometricTransform flip{GeometricKind::FlipH};
  Vec2 plain = Vec2::Zero(), flipped = Vec2::Zero();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = forward(model, make_sample(data, i).input);
    const auto q = forward(model, make_sample(data, i, {flip, {}}).input);
    const auto mirrored = conjugate_motion(p[0], flip, data.video("hand").geometry);
    for (int c = 0; c < 4; ++c) {
      plain += mirrored[c];
      flipped += q[0][c];
    }
  }
  EXPECT_LE((plain - flipped).norm(), 0.2 * plain.norm());
  EXPECT_LT(plain.x(), 0.0);
}

TEST(Train, EmptyDatasetThrows) {
  EXPECT_THROW(train(ClipDataset{}, ClipDataset{}, TrainConfig{}), EmptyDataset);
}

TEST(PredictClips, OnePredictionPerClipAndThreadIndependent) {
  const ClipSpec spec{3, 2, 1, 1};
  const auto data = fixture::hand_dataset(spec, 20, [](int t) { return fixture::noise(4, t); },
                                          [](int t) { return FourPointDelta::uniform({double(t), 0}); });
  const auto m = PredictorModel::initialize({3, 2, 4, {5}}, 1);
  const auto a = predict_clips(m, data, 1), b = predict_clips(m, data, 3);
  ASSERT_EQ(a.size(), data.size());
  EXPECT_EQ(a[0].size(), 2u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}
