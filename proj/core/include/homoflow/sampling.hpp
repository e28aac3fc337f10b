#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "homoflow/track.hpp"

namespace homoflow {

// Recall horizon n, preview horizon m, frame increment dn, start stride dc.
struct ClipSpec {
  int n = 14;
  int m = 1;
  int dn = 5;
  int dc = 5;

  // Throws ParameterOutOfRange.
  void validate() const;
  // Frames spanned from the first to the last clip frame.
  int span() const { return (n + m - 1) * dn; }
  bool operator==(const ClipSpec&) const = default;
};

struct Clip {
  std::string video_id;
  int start = 0;
  std::vector<int> frame_indices;  // start, start + dn, ..., start + (n + m - 1) dn
  int recall_count = 0;            // the first recall_count frames are the recall horizon

  int recall_end() const { return frame_indices[static_cast<std::size_t>(recall_count) - 1]; }
  bool operator==(const Clip&) const = default;
};

Clip make_clip(const std::string& video_id, int start, const ClipSpec& spec);

// True when every one of the n + m - 1 inter-frame motions of the clip is present.
bool clip_complete(const MotionTrack& track, const Clip& clip);

// Population standard deviation of motion_magnitude over every present entry.
// Throws EmptyDataset.
double compute_sigma(std::span<const MotionTrack> tracks);

// Present indices with magnitude strictly above sigma, ascending.
std::vector<int> anchors(const MotionTrack& track, double sigma);

// Starts on the dc lattice whose whole clip fits in the video.
std::vector<int> valid_starts(int frame_count, const ClipSpec& spec);

// Starts whose last recall frame is an anchor and whose motion is complete.
std::vector<int> candidate_starts(const MotionTrack& track, double sigma, const ClipSpec& spec);

// Uniform draw without replacement from the candidate clips, in draw order.
// Throws NoCandidates.
std::vector<Clip> importance_sample(const MotionTrack& track, double sigma, const ClipSpec& spec,
                                    std::size_t count, std::uint64_t seed);

// Pooled over all tracks of a dataset.
std::vector<Clip> importance_sample(std::span<const MotionTrack> tracks, double sigma, const ClipSpec& spec,
                                    std::size_t count, std::uint64_t seed);

std::vector<Clip> enumerate_clips(const MotionTrack& track, const ClipSpec& spec);

// Clip index file: {spec, sigma, clips: [{video_id, start}]}.
struct ClipIndex {
  ClipSpec spec;
  double sigma = 0.0;
  std::vector<Clip> clips;
};

void write_clip_index(const std::filesystem::path& path, const ClipIndex& index);
ClipIndex read_clip_index(const std::filesystem::path& path);

}  // namespace homoflow
