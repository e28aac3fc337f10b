#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homoflow/dataset.hpp"
#include "homoflow/homography.hpp"
#include "homoflow/image.hpp"
#include "homoflow/motion_classify.hpp"
#include "homoflow/predictor.hpp"

namespace homoflow {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

// Mean corner-error norm of one sample over its M preview steps.
double sample_error(const MotionSequence& pred, const MotionSequence& target);

// Per-sample errors, then their mean and population std.
// Throws EmptySet, DimensionMismatch.
MeanStd mpd(const std::vector<MotionSequence>& preds, const std::vector<MotionSequence>& targets);

// Motion of the frame centre under d, scaled to [-1, 1] by the half extent.
Vec2 center_displacement(const FourPointDelta& d, const FrameGeometry& geom);

inline constexpr double kAgreementDeadZone = 1e-3;

// Direction read off a centre displacement: the larger component's axis and
// sign, or nullopt inside the dead zone.
std::optional<MotionClass> dominant_direction(const Vec2& displacement);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

// Linear interpolation between order statistics. Throws EmptySet.
Quartiles quartiles(std::vector<double> values);

struct LabelAgreement {
  MotionClass label = MotionClass::Static;
  std::size_t count = 0;
  std::size_t agree = 0;
  std::size_t abstain = 0;
  double agreement = 0.0;  // agree / count
  Vec2 mean{0.0, 0.0};
  Quartiles x, y;
};

struct AgreementTable {
  std::vector<LabelAgreement> rows;  // Up, Down, Left, Right with at least one clip
  std::size_t count = 0;
  std::size_t agree = 0;
  std::size_t abstain = 0;
  std::size_t ignored = 0;  // labels outside Up/Down/Left/Right
  bool negated = false;
  double agreement() const { return count ? static_cast<double>(agree) / static_cast<double>(count) : 0.0; }
  const LabelAgreement* row(MotionClass c) const;
};

// Agreement of centre displacements with direction labels. With
// allow_negation the displacements are negated when that scores strictly
// better, and `negated` reports it. Throws LabelMismatch on length mismatch.
AgreementTable label_agreement(const std::vector<Vec2>& displacements, const std::vector<MotionClass>& labels,
                               bool allow_negation = false);

// Past frame warped by d into R and G, current frame in B.
// Throws DimensionMismatch when the frame sizes differ.
RgbImage warp_overlay(const GrayFrame& past, const GrayFrame& current, const FourPointDelta& d);

// Mean |warped past - current| in [0, 1] over pixels whose source lies inside
// the past frame.
double overlay_misalignment(const GrayFrame& past, const GrayFrame& current, const FourPointDelta& d);

struct NamedEstimator {
  std::string name;
  // Processes a whole frame sequence once.
  std::function<void(const std::vector<GrayFrame>&)> run;
};

struct BenchmarkRow {
  std::string method;
  double mean_s = 0.0;
  double std_s = 0.0;
  double speedup = 1.0;  // slowest mean / this mean
};

// One untimed warm-up run, then `repeats` timed runs per estimator.
// Throws ParameterOutOfRange when repeats < 2.
std::vector<BenchmarkRow> run_benchmark(const std::vector<NamedEstimator>& estimators,
                                        const std::vector<GrayFrame>& sequence, int repeats);
// Benchmarks on a seeded synthetic sequence of `sequence_length` frames.
std::vector<BenchmarkRow> run_benchmark(const std::vector<NamedEstimator>& estimators, int sequence_length,
                                        int repeats, std::uint64_t seed);

std::string benchmark_table(const std::vector<BenchmarkRow>& rows);

// Estimators available to `bench`: "ransac" and "dlt-all" (no outlier rejection).
std::vector<NamedEstimator> default_estimators();

struct ClipRecord {
  std::string video_id;
  int start = 0;
  std::optional<MotionClass> label;
  std::map<std::string, double> error;       // per method
  std::map<std::string, Vec2> displacement;  // per method, first preview step
};

struct MethodSummary {
  std::string method;
  MeanStd mpd;
  std::size_t count = 0;
};

struct EvalReport {
  std::vector<MethodSummary> methods;
  std::vector<ClipRecord> records;
  std::map<std::string, AgreementTable> agreement;  // methods with labelled clips
  std::string config_json = "{}";

  const MethodSummary& method(const std::string& name) const;
};

using MethodPredictions = std::vector<std::pair<std::string, std::vector<MotionSequence>>>;

// Taylor baselines for every clip of the dataset.
std::vector<MotionSequence> baseline_predictions(const ClipDataset& data, int order);

// Scores each method's predictions against the dataset targets. `labels` is
// empty or one entry per clip. Throws LabelMismatch, DimensionMismatch.
EvalReport evaluate(const ClipDataset& data, const MethodPredictions& predictions,
                    const std::vector<std::optional<MotionClass>>& labels, int threads = 1);

std::string report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);
// sha256 of report_to_json.
std::string report_hash(const EvalReport& report);
// Centre displacements of one method grouped by label.
std::string displacement_svg(const EvalReport& report, const std::string& method);

// report.json, report.csv and one centers_<method>.svg per labelled method.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

// Motion labels keyed by (video id, motion start frame).
using LabelTable = std::map<std::pair<std::string, int>, MotionClass>;

// CSV with header video_id,start_frame,label. Throws InvalidInput.
LabelTable read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const LabelTable& labels);

// Label of the first preview motion of each clip (the motion starting at the
// last recall frame), when present in the table.
std::vector<std::optional<MotionClass>> clip_labels(const ClipDataset& data, const LabelTable& labels);

}  // namespace homoflow
