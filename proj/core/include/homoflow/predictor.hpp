#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "homoflow/dataset.hpp"
#include "homoflow/homography.hpp"
#include "homoflow/image.hpp"

namespace homoflow {

using MotionSequence = std::vector<FourPointDelta>;

// Hold the last recall motion for every preview step.
// Throws MissingHistory without history.
MotionSequence taylor_o1(std::span<const FourPointDelta> recall_motions, int steps = 1);

// Linear extrapolation from the last two recall motions.
MotionSequence taylor_o2(std::span<const FourPointDelta> recall_motions, int steps = 1);

struct PredictorInput {
  std::vector<GrayFrame> recall_frames;
  std::vector<FourPointDelta> recall_motions;  // baselines only
  FrameGeometry geometry;
};

struct Architecture {
  int recall = 14;
  int preview = 1;
  int frame_size = 32;
  std::vector<int> hidden{128};

  int input_dim() const { return recall * frame_size * frame_size; }
  int output_dim() const { return 8 * preview; }
  bool operator==(const Architecture&) const = default;
};

// Fully connected tanh network regressing the preview motions from the
// flattened recall frames. Outputs are z-scored; target_mean/target_scale map
// them back to pixels.
struct PredictorModel {
  Architecture arch;
  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd target_mean;
  Eigen::VectorXd target_scale;
  std::uint64_t seed = 0;
  std::string created;

  // Glorot-uniform weights, zero biases, identity normalization.
  static PredictorModel initialize(const Architecture& arch, std::uint64_t seed);

  // Throws DimensionMismatch.
  void validate() const;
  std::size_t parameter_count() const;
};

bool operator==(const PredictorModel& a, const PredictorModel& b);

// Model file: JSON {arch, normalization, seed, created, layers: [{weights, bias}]}.
std::string model_to_json(const PredictorModel& model);
PredictorModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const PredictorModel& model);
PredictorModel load_model(const std::filesystem::path& path);

// Columns of `inputs` are samples; returns de-normalized outputs (8m x batch).
Eigen::MatrixXd forward_batch(const PredictorModel& model, const Eigen::MatrixXd& inputs);
MotionSequence forward(const PredictorModel& model, const Eigen::VectorXd& input);
// Throws DimensionMismatch.
MotionSequence forward(const PredictorModel& model, const PredictorInput& input);

MotionSequence unpack_motions(const Eigen::VectorXd& flat);
Eigen::VectorXd pack_motions(const MotionSequence& motions);

// Mean corner error norm plus lambda times the mean predicted corner norm.
double loss(const MotionSequence& pred, const MotionSequence& target, double lambda);

struct Batch {
  Eigen::MatrixXd inputs;               // input_dim x batch
  std::vector<MotionSequence> targets;  // one per column
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Mean loss over the batch.
double batch_loss(const PredictorModel& model, const Batch& batch, double lambda);

// Analytic gradient of batch_loss; the norms use subgradient 0 at zero.
Gradients gradient(const PredictorModel& model, const Batch& batch, double lambda);

struct AugmentationConfig {
  bool geometric = false;
  bool photometric = false;
  std::uint64_t seed = 0;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::vector<std::pair<int, double>> lr_drops;  // (epoch, factor), 0-based epochs
  double lambda = 0.1;
  std::uint64_t seed = 0;
  std::string optimizer = "adam";  // "adam" or "sgd"
  double momentum = 0.9;           // sgd only
  std::vector<int> hidden{128};
  AugmentationConfig augmentation;
  int threads = 1;

  // Throws ParameterOutOfRange.
  void validate() const;
  double lr_at(int epoch) const;
};

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

struct EpochLog {
  int epoch = 0;
  std::string split;  // "train" or "val"
  double loss = 0.0;
  double mpd = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  PredictorModel model;
  std::vector<EpochLog> log;
};

std::string loss_log_csv(const std::vector<EpochLog>& log);

// Mini-batch training with seeded shuffling and per-clip augmentation.
// `validation` may be empty. Throws EmptyDataset.
TrainResult train(const ClipDataset& training, const ClipDataset& validation, const TrainConfig& cfg);

// Predictions for every clip of the dataset, without augmentation.
std::vector<MotionSequence> predict_clips(const PredictorModel& model, const ClipDataset& data, int threads = 1);

}  // namespace homoflow
