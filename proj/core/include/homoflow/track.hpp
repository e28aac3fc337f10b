#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "homoflow/homography.hpp"

namespace homoflow {

// Per-index motion stream: entries[n] is the motion from frame n to n + dn,
// std::nullopt where estimation failed.
struct MotionTrack {
  std::string video_id;
  int dn = 1;
  double fps = 25.0;
  FrameGeometry geometry;
  std::vector<std::optional<FourPointDelta>> entries;

  std::size_t frame_count() const { return entries.size() + static_cast<std::size_t>(dn); }
  std::size_t present_count() const;
  bool present(std::size_t n) const { return n < entries.size() && entries[n].has_value(); }
};

// JSON Lines: a header {video_id, dn, fps, width, height}, then one
// {"n": int, "duv": [8 floats] | null} record per index.
void write_track(const std::filesystem::path& path, const MotionTrack& track);
MotionTrack read_track(const std::filesystem::path& path);

// All *.jsonl tracks of a directory, ordered by filename.
std::vector<MotionTrack> read_tracks(const std::filesystem::path& dir);

}  // namespace homoflow
