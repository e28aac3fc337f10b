#include "homoflow/track.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "homoflow/error.hpp"

namespace homoflow {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t MotionTrack::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.has_value(); }));
}

void write_track(const fs::path& path, const MotionTrack& track) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  const json header = {{"video_id", track.video_id},
                       {"dn", track.dn},
                       {"fps", track.fps},
                       {"width", track.geometry.width},
                       {"height", track.geometry.height}};
  out << header.dump() << '\n';
  for (std::size_t n = 0; n < track.entries.size(); ++n) {
    json rec = {{"n", n}};
    if (track.entries[n]) {
      rec["duv"] = track.entries[n]->to_array();
    } else {
      rec["duv"] = nullptr;
    }
    out << rec.dump() << '\n';
  }
}

MotionTrack read_track(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  MotionTrack track;
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("empty track file " + path.string());
  try {
    const json header = json::parse(line);
    track.video_id = header.at("video_id").get<std::string>();
    track.dn = header.at("dn").get<int>();
    track.fps = header.value("fps", 25.0);
    track.geometry = FrameGeometry(header.at("width").get<int>(), header.at("height").get<int>());
    if (track.dn < 1) throw InvalidInput("dn must be >= 1");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      const auto n = rec.at("n").get<std::size_t>();
      if (n != track.entries.size()) throw InvalidInput("track records must be contiguous from n=0");
      const auto& duv = rec.at("duv");
      if (duv.is_null()) {
        track.entries.emplace_back(std::nullopt);
      } else {
        const auto values = duv.get<std::vector<double>>();
        if (values.size() != 8) throw InvalidInput("duv must hold 8 values");
        track.entries.emplace_back(FourPointDelta::from_array(std::span<const double, 8>(values.data(), 8)));
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInput("malformed track " + path.string() + ": " + e.what());
  }
  return track;
}

std::vector<MotionTrack> read_tracks(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidInput("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<MotionTrack> tracks;
  for (const auto& f : files) tracks.push_back(read_track(f));
  return tracks;
}

}  // namespace homoflow
