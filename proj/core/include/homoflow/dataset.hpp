#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "homoflow/augmentation.hpp"
#include "homoflow/image.hpp"
#include "homoflow/sampling.hpp"
#include "homoflow/track.hpp"

namespace homoflow {

// Predictor-resolution frames of one video plus the full-resolution geometry
// the motion targets live in.
struct VideoFrames {
  std::string video_id;
  FrameGeometry geometry;
  std::vector<GrayFrame> frames;
};

// Clips over a set of videos, with the motion tracks that supply both the
// baselines' history and the training targets.
class ClipDataset {
 public:
  ClipDataset() = default;
  ClipDataset(ClipSpec spec, std::vector<VideoFrames> videos, std::vector<MotionTrack> tracks,
              std::vector<Clip> clips);

  const ClipSpec& spec() const { return spec_; }
  const std::vector<Clip>& clips() const { return clips_; }
  std::size_t size() const { return clips_.size(); }
  bool empty() const { return clips_.empty(); }
  int frame_size() const;

  const VideoFrames& video(const std::string& id) const;
  const MotionTrack& track(const std::string& id) const;
  const std::vector<MotionTrack>& tracks() const { return tracks_; }
  const std::vector<VideoFrames>& videos() const { return videos_; }

  // Same videos and tracks, different clip list.
  ClipDataset with_clips(std::vector<Clip> clips) const;

  // Recall-horizon motions (n - 1) and preview targets (m) of a clip.
  std::vector<FourPointDelta> recall_motions(std::size_t clip) const;
  std::vector<FourPointDelta> targets(std::size_t clip) const;

 private:
  ClipSpec spec_;
  std::vector<VideoFrames> videos_;
  std::vector<MotionTrack> tracks_;
  std::vector<Clip> clips_;
  std::map<std::string, std::size_t> video_index_;
  std::map<std::string, std::size_t> track_index_;
};

// One training/evaluation example after augmentation. The estimator branch
// sees only the geometric transform (targets are conjugated); the predictor
// input additionally carries the photometric transform.
struct ClipSample {
  Eigen::VectorXd input;
  std::vector<FourPointDelta> recall_motions;
  std::vector<FourPointDelta> targets;
  FrameGeometry geometry;
};

ClipSample make_sample(const ClipDataset& data, std::size_t clip, const Augmentation& aug = {});

// Recall frames of a clip transformed for the predictor branch.
std::vector<GrayFrame> predictor_frames(const ClipDataset& data, std::size_t clip, const Augmentation& aug);

// Recall frames flattened in order, each pixel shifted to [-0.5, 0.5].
Eigen::VectorXd flatten_frames(const std::vector<GrayFrame>& frames);

}  // namespace homoflow
