#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "homoflow/dataset.hpp"
#include "homoflow/error.hpp"
#include "homoflow/estimation.hpp"
#include "homoflow/evaluation.hpp"
#include "homoflow/predictor.hpp"
#include "homoflow/sampling.hpp"
#include "homoflow/synthetic.hpp"

namespace homoflow {

// Synthetic video collection: one scene and one trajectory per video.
struct SynthConfig {
  TrajectoryKind kind = TrajectoryKind::CueConditioned;
  int videos = 12;
  int frames = 1500;  // per video
  int viewport = 128;
  int canvas = 1024;
  int dn = 5;
  double fps = 25.0;
  std::uint64_t seed = 1;
  // Viewport and canvas are overridden. Cue segments last whole multiples of
  // dn, so each dn-step motion follows a single marker.
  TrajectoryParams params = [] {
    TrajectoryParams p;
    p.min_dwell = 10;
    p.max_dwell = 20;
    p.dwell_quantum = 5;
    return p;
  }();
  double object_area = 0.0;
  double photometric_noise = 0.0;

  void validate() const;
};

struct SyntheticVideo {
  std::string video_id;
  Scene scene;
  Trajectory trajectory;
  RenderOptions options;
};

std::string synthetic_video_id(int index);
// Deterministic in (cfg, index).
SyntheticVideo make_synthetic_video(const SynthConfig& cfg, int index);

// Truth tracks, labels and predictor-resolution frames of every video.
struct SyntheticDataset {
  std::vector<MotionTrack> tracks;
  std::vector<VideoFrames> videos;
  LabelTable labels;
  double sigma = 0.0;  // pooled over all tracks; drives the labels
};

// frame_size <= 0 keeps full resolution.
SyntheticDataset build_synthetic_dataset(const SynthConfig& cfg, int frame_size, int threads = 1);

// OUT/frames/<video>/NNNNNN.png, OUT/tracks/<video>.jsonl, OUT/labels.csv.
void write_synthetic_dataset(const SynthConfig& cfg, const std::filesystem::path& out, int threads = 1);

// Estimated track of a frame directory; unestimable pairs become missing entries.
MotionTrack estimate_track(const std::vector<GrayFrame>& frames, const std::string& video_id, int dn, double fps,
                           const EstimatorConfig& cfg, int threads = 1);

// Frames of DIR/frames/<video>/ downsampled to frame_size, matched to the
// tracks in DIR/tracks/. Throws InvalidInput.
std::vector<VideoFrames> load_video_frames(const std::filesystem::path& frames_root,
                                           const std::vector<MotionTrack>& tracks, int frame_size, int threads = 1);

struct PipelineConfig {
  // Empty: generate `synth` in memory. Otherwise a directory laid out like
  // write_synthetic_dataset output.
  std::string data_dir;
  SynthConfig synth;
  ClipSpec clips;
  int frame_size = 32;
  // Videos are split in order: the first train_videos, then val_videos, the rest test.
  int train_videos = 9;
  int val_videos = 1;
  // Clip counts per split; 0 takes every candidate.
  std::size_t train_clips = 0;
  std::size_t val_clips = 0;
  std::size_t test_clips = 0;
  std::uint64_t sampling_seed = 7;
  // Targets from estimate_motion instead of the synthetic truth.
  bool estimate_targets = false;
  EstimatorConfig estimator;
  // Geometric augmentation mirrors the cue layout along with the targets.
  TrainConfig train = [] {
    TrainConfig t;
    t.augmentation.geometric = true;
    return t;
  }();
  int threads = 1;

  // Throws InvalidInput naming the offending field.
  void validate() const;
};

// Thread count is omitted: it must not change results.
std::string pipeline_config_to_json(const PipelineConfig& cfg);
// Unknown keys are rejected. Throws InvalidInput.
PipelineConfig pipeline_config_from_json(const std::string& text);

// Human-readable stage list for --dry-run.
std::string describe_plan(const PipelineConfig& cfg);

// A stage failed; carries the stage name and whether the cause was bad input.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what, bool bad_input)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)), bad_input_(bad_input) {}
  const std::string& stage() const { return stage_; }
  bool bad_input() const { return bad_input_; }

 private:
  std::string stage_;
  bool bad_input_;
};

struct PipelineResult {
  EvalReport report;
  std::string report_hash;
  TrainResult training;
  double sigma = 0.0;
  std::size_t train_clips = 0;
  std::size_t val_clips = 0;
  std::size_t test_clips = 0;
};

using LogFn = std::function<void(const std::string&)>;

// Data -> sampling -> training -> evaluation. When `out` is non-empty the
// model, loss log, clip indices, report and manifest are written there.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out = {}, const LogFn& log = {});

}  // namespace homoflow
