#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homoflow/dataset.hpp"
#include "homoflow/random.hpp"
#include "homoflow/sampling.hpp"

namespace fixture {

// One video whose frame t is frame_fn(t) and whose dn = 1 motion t is
// motion_fn(t); every valid clip start is used.
inline homoflow::ClipDataset hand_dataset(const homoflow::ClipSpec& spec, int frames,
                                          const std::function<homoflow::GrayFrame(int)>& frame_fn,
                                          const std::function<homoflow::FourPointDelta(int)>& motion_fn,
                                          const homoflow::FrameGeometry& geom = {64, 64},
                                          const std::string& id = "hand") {
  homoflow::VideoFrames v{id, geom, {}};
  homoflow::MotionTrack t;
  t.video_id = id;
  t.dn = spec.dn;
  t.geometry = geom;
  for (int i = 0; i < frames; ++i) v.frames.push_back(frame_fn(i));
  for (int i = 0; i + spec.dn < frames; ++i) t.entries.push_back(motion_fn(i));
  auto clips = homoflow::enumerate_clips(t, spec);
  return homoflow::ClipDataset(spec, {std::move(v)}, {std::move(t)}, std::move(clips));
}

inline homoflow::GrayFrame noise(int size, std::uint64_t seed) {
  homoflow::Rng rng(seed);
  homoflow::GrayFrame f(size, size);
  for (auto& p : f.pixels) p = static_cast<float>(rng.uniform());
  return f;
}

}  // namespace fixture
