#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "homoflow/homography.hpp"
#include "homoflow/image.hpp"
#include "homoflow/motion_classify.hpp"
#include "homoflow/track.hpp"

namespace homoflow {

// Large planar texture the viewport moves over.
struct Scene {
  GrayFrame canvas;
  std::uint64_t seed = 0;
};

// Band-limited value noise plus random blobs, normalized to [0, 1].
// Throws ParameterOutOfRange for size < 512.
Scene generate_scene(std::uint64_t seed, int size = 1024);

enum class TrajectoryKind {
  ConstantVelocity,
  LinearAcceleration,
  PiecewiseConstantWithSwitches,
  CueConditioned,
  RandomProjective
};

std::string_view to_string(TrajectoryKind k);
TrajectoryKind trajectory_kind_from_string(std::string_view s);

struct TrajectoryParams {
  FrameGeometry viewport{128, 128};
  int canvas_size = 1024;

  // ConstantVelocity; initial step of LinearAcceleration.
  Vec2 velocity{2.0, 0.0};
  // LinearAcceleration: per-step increment of the translation.
  Vec2 acceleration{1.0, 0.0};
  // PiecewiseConstantWithSwitches: (first step, velocity) segments, sorted.
  std::vector<std::pair<int, Vec2>> switches;

  // CueConditioned.
  double cue_speed = 2.0;  // px per step
  int min_dwell = 8;
  int max_dwell = 24;
  double static_probability = 0.25;
  int cue_directions = 4;  // 2: left/right only
  // The marker in frame t commands step t + cue_lead.
  int cue_lead = 0;
  // Dwell times are rounded down to a multiple of this (at least one quantum).
  int dwell_quantum = 1;

  // RandomProjective: per-step corner jitter (px) around `velocity`.
  double projective_jitter = 1.0;
};

// Per-step ground truth: steps[t] maps frame t to frame t + 1 (content motion).
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::ConstantVelocity;
  std::vector<Homography> steps;
  // CueConditioned only: marker centre in frame t (viewport pixels), or
  // nullopt when no marker is shown. One entry per step.
  std::vector<std::optional<Vec2>> cues;
  FrameGeometry viewport;
  int canvas_size = 0;

  std::size_t frame_count() const { return steps.size() + 1; }
};

// `length` is the number of steps. Throws ViewportEscape.
Trajectory generate_trajectory(TrajectoryKind kind, int length, const TrajectoryParams& params, std::uint64_t seed);

// Motion direction commanded by a cue marker: the dominant axis of its offset
// from the frame centre.
MotionClass cue_direction(const Vec2& cue, const FrameGeometry& viewport);

struct RenderOptions {
  int dn = 1;
  double fps = 25.0;
  std::string video_id = "synthetic";
  // Independently moving rigid patch.
  double object_area = 0.0;
  Vec2 object_velocity{3.0, -2.0};
  double photometric_noise = 0.0;
  std::uint64_t noise_seed = 0;
  // Static threshold for labels; the truth track's own sigma when unset.
  std::optional<double> sigma;
};

// Renders frames on demand so long sequences need not be held in memory.
class SequenceRenderer {
 public:
  SequenceRenderer(const Scene& scene, const Trajectory& trajectory, RenderOptions options);

  std::size_t frame_count() const { return viewport_maps_.size(); }
  GrayFrame frame(std::size_t t) const;
  // Exact dn-step motions composed from the generating homographies.
  MotionTrack truth() const;
  // Canvas coordinates of viewport pixels for frame t.
  const Homography& viewport_map(std::size_t t) const { return viewport_maps_[t]; }

 private:
  const Scene& scene_;
  const Trajectory& trajectory_;
  RenderOptions options_;
  std::vector<Homography> viewport_maps_;
};

struct RenderedSequence {
  std::vector<GrayFrame> frames;
  MotionTrack truth;
  std::vector<MotionClass> labels;  // classify(truth entry n)
  double sigma = 0.0;
};

RenderedSequence render_sequence(const Scene& scene, const Trajectory& trajectory, const RenderOptions& options);

// Frame pair related by `g` (content motion a -> b), both sampled from the
// scene centre. Used by estimator tests.
std::pair<GrayFrame, GrayFrame> render_pair(const Scene& scene, const Homography& g, const FrameGeometry& geom,
                                            const RenderOptions& options = {});

// Random projective motion whose corner displacements stay within max_corner px.
Homography random_homography(std::uint64_t seed, const FrameGeometry& geom, double max_corner);

}  // namespace homoflow
