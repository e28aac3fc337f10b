#include "homoflow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "homoflow/error.hpp"
#include "homoflow/motion_classify.hpp"
#include "homoflow/random.hpp"

namespace homoflow {

using nlohmann::json;

void ClipSpec::validate() const {
  if (n < 1 || m < 1 || dn < 1 || dc < 1) throw ParameterOutOfRange("clip spec values must all be >= 1");
}

Clip make_clip(const std::string& video_id, int start, const ClipSpec& spec) {
  Clip clip{video_id, start, {}, spec.n};
  clip.frame_indices.reserve(static_cast<std::size_t>(spec.n + spec.m));
  for (int k = 0; k < spec.n + spec.m; ++k) clip.frame_indices.push_back(start + k * spec.dn);
  return clip;
}

bool clip_complete(const MotionTrack& track, const Clip& clip) {
  for (std::size_t k = 0; k + 1 < clip.frame_indices.size(); ++k)
    if (!track.present(static_cast<std::size_t>(clip.frame_indices[k]))) return false;
  return true;
}

double compute_sigma(std::span<const MotionTrack> tracks) {
  std::size_t count = 0;
  double mean = 0.0, m2 = 0.0;
  // Welford; the tests check it against a naive two-pass computation.
  for (const auto& t : tracks)
    for (const auto& e : t.entries) {
      if (!e) continue;
      const double x = motion_magnitude(*e);
      ++count;
      const double delta = x - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (x - mean);
    }
  if (count == 0) throw EmptyDataset("no present motion entries");
  return std::sqrt(std::max(0.0, m2 / static_cast<double>(count)));
}

std::vector<int> anchors(const MotionTrack& track, double sigma) {
  std::vector<int> out;
  for (std::size_t n = 0; n < track.entries.size(); ++n)
    if (track.entries[n] && motion_magnitude(*track.entries[n]) > sigma) out.push_back(static_cast<int>(n));
  return out;
}

std::vector<int> valid_starts(int frame_count, const ClipSpec& spec) {
  spec.validate();
  std::vector<int> out;
  for (int s = 0; s + spec.span() <= frame_count - 1; s += spec.dc) out.push_back(s);
  return out;
}

std::vector<int> candidate_starts(const MotionTrack& track, double sigma, const ClipSpec& spec) {
  spec.validate();
  const auto starts = valid_starts(static_cast<int>(track.frame_count()), spec);
  const std::set<int> lattice(starts.begin(), starts.end());
  std::vector<int> out;
  for (int a : anchors(track, sigma)) {
    const int s = a - (spec.n - 1) * spec.dn;
    if (!lattice.contains(s)) continue;
    if (clip_complete(track, make_clip(track.video_id, s, spec))) out.push_back(s);
  }
  return out;
}

namespace {

template <typename T>
std::vector<T> draw_without_replacement(std::vector<T> pool, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t take = std::min(count, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

}  // namespace

std::vector<Clip> importance_sample(const MotionTrack& track, double sigma, const ClipSpec& spec,
                                    std::size_t count, std::uint64_t seed) {
  return importance_sample(std::span<const MotionTrack>(&track, 1), sigma, spec, count, seed);
}

std::vector<Clip> importance_sample(std::span<const MotionTrack> tracks, double sigma, const ClipSpec& spec,
                                    std::size_t count, std::uint64_t seed) {
  std::vector<Clip> pool;
  for (const auto& t : tracks)
    for (int s : candidate_starts(t, sigma, spec)) pool.push_back(make_clip(t.video_id, s, spec));
  if (pool.empty()) throw NoCandidates("no clip ends its recall horizon on an anchor");
  return draw_without_replacement(std::move(pool), count, seed);
}

std::vector<Clip> enumerate_clips(const MotionTrack& track, const ClipSpec& spec) {
  std::vector<Clip> out;
  for (int s : valid_starts(static_cast<int>(track.frame_count()), spec)) {
    auto clip = make_clip(track.video_id, s, spec);
    if (clip_complete(track, clip)) out.push_back(std::move(clip));
  }
  return out;
}

void write_clip_index(const std::filesystem::path& path, const ClipIndex& index) {
  json clips = json::array();
  for (const auto& c : index.clips) clips.push_back({{"video_id", c.video_id}, {"start", c.start}});
  const json j = {{"spec", {{"n", index.spec.n}, {"m", index.spec.m}, {"dn", index.spec.dn}, {"dc", index.spec.dc}}},
                  {"sigma", index.sigma},
                  {"clips", clips}};
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ClipIndex read_clip_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    const json j = json::parse(in);
    ClipIndex index;
    const auto& s = j.at("spec");
    index.spec = {s.at("n").get<int>(), s.at("m").get<int>(), s.at("dn").get<int>(), s.at("dc").get<int>()};
    index.spec.validate();
    index.sigma = j.at("sigma").get<double>();
    for (const auto& c : j.at("clips"))
      index.clips.push_back(make_clip(c.at("video_id").get<std::string>(), c.at("start").get<int>(), index.spec));
    return index;
  } catch (const json::exception& e) {
    throw InvalidInput("malformed clip index " + path.string() + ": " + e.what());
  }
}

}  // namespace homoflow
