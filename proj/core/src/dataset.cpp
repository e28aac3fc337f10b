#include "homoflow/dataset.hpp"

#include "homoflow/error.hpp"

namespace homoflow {

ClipDataset::ClipDataset(ClipSpec spec, std::vector<VideoFrames> videos, std::vector<MotionTrack> tracks,
                         std::vector<Clip> clips)
    : spec_(spec), videos_(std::move(videos)), tracks_(std::move(tracks)), clips_(std::move(clips)) {
  spec_.validate();
  for (std::size_t i = 0; i < videos_.size(); ++i) video_index_[videos_[i].video_id] = i;
  for (std::size_t i = 0; i < tracks_.size(); ++i) track_index_[tracks_[i].video_id] = i;
  for (const auto& c : clips_) {
    const auto& v = video(c.video_id);
    const auto& t = track(c.video_id);
    if (c.frame_indices.back() >= static_cast<int>(v.frames.size()))
      throw InvalidInput("clip exceeds video " + c.video_id);
    if (!clip_complete(t, c)) throw InvalidInput("clip has missing motion in " + c.video_id);
  }
}

int ClipDataset::frame_size() const {
  for (const auto& v : videos_)
    if (!v.frames.empty()) return v.frames.front().width;
  return 0;
}

const VideoFrames& ClipDataset::video(const std::string& id) const {
  const auto it = video_index_.find(id);
  if (it == video_index_.end()) throw InvalidInput("unknown video " + id);
  return videos_[it->second];
}

const MotionTrack& ClipDataset::track(const std::string& id) const {
  const auto it = track_index_.find(id);
  if (it == track_index_.end()) throw InvalidInput("no track for video " + id);
  return tracks_[it->second];
}

ClipDataset ClipDataset::with_clips(std::vector<Clip> clips) const {
  return ClipDataset(spec_, videos_, tracks_, std::move(clips));
}

std::vector<FourPointDelta> ClipDataset::recall_motions(std::size_t clip) const {
  const Clip& c = clips_.at(clip);
  const auto& t = track(c.video_id);
  std::vector<FourPointDelta> out;
  for (int k = 0; k + 1 < c.recall_count; ++k) out.push_back(*t.entries[static_cast<std::size_t>(c.frame_indices[k])]);
  return out;
}

std::vector<FourPointDelta> ClipDataset::targets(std::size_t clip) const {
  const Clip& c = clips_.at(clip);
  const auto& t = track(c.video_id);
  std::vector<FourPointDelta> out;
  for (std::size_t k = static_cast<std::size_t>(c.recall_count) - 1; k + 1 < c.frame_indices.size(); ++k)
    out.push_back(*t.entries[static_cast<std::size_t>(c.frame_indices[k])]);
  return out;
}

std::vector<GrayFrame> predictor_frames(const ClipDataset& data, std::size_t clip, const Augmentation& aug) {
  const Clip& c = data.clips().at(clip);
  const auto& v = data.video(c.video_id);
  std::vector<GrayFrame> frames;
  frames.reserve(static_cast<std::size_t>(c.recall_count));
  for (int k = 0; k < c.recall_count; ++k) {
    const GrayFrame& f = v.frames[static_cast<std::size_t>(c.frame_indices[k])];
    frames.push_back(aug.photometric.apply(apply_geometric(f, aug.geometric), static_cast<std::size_t>(k)));
  }
  return frames;
}

Eigen::VectorXd flatten_frames(const std::vector<GrayFrame>& frames) {
  std::size_t total = 0;
  for (const auto& f : frames) total += f.pixels.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>(total));
  Eigen::Index i = 0;
  for (const auto& f : frames)
    for (float v : f.pixels) x(i++) = static_cast<double>(v) - 0.5;
  return x;
}

ClipSample make_sample(const ClipDataset& data, std::size_t clip, const Augmentation& aug) {
  const auto& geom = data.video(data.clips().at(clip).video_id).geometry;
  ClipSample s;
  s.input = flatten_frames(predictor_frames(data, clip, aug));
  s.geometry = aug.geometric.output_geometry(geom);
  for (const auto& d : data.recall_motions(clip)) s.recall_motions.push_back(conjugate_motion(d, aug.geometric, geom));
  for (const auto& d : data.targets(clip)) s.targets.push_back(conjugate_motion(d, aug.geometric, geom));
  return s;
}

}  // namespace homoflow
