#include "homoflow/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "homoflow/manifest.hpp"
#include "homoflow/parallel.hpp"
#include "homoflow/random.hpp"

namespace homoflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw InvalidInput("unknown config key '" + where + "." + key + "'");
}

json vec_json(const Vec2& v) { return {v.x(), v.y()}; }
Vec2 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json synth_json(const SynthConfig& s) {
  json switches = json::array();
  for (const auto& [t, v] : s.params.switches) switches.push_back({t, vec_json(v)});
  const auto& p = s.params;
  return {{"kind", std::string(to_string(s.kind))},
          {"videos", s.videos},
          {"frames", s.frames},
          {"viewport", s.viewport},
          {"canvas", s.canvas},
          {"fps", s.fps},
          {"seed", s.seed},
          {"object_area", s.object_area},
          {"photometric_noise", s.photometric_noise},
          {"trajectory",
           {{"velocity", vec_json(p.velocity)},
            {"acceleration", vec_json(p.acceleration)},
            {"switches", switches},
            {"cue_speed", p.cue_speed},
            {"min_dwell", p.min_dwell},
            {"max_dwell", p.max_dwell},
            {"static_probability", p.static_probability},
            {"cue_directions", p.cue_directions},
            {"cue_lead", p.cue_lead},
            {"dwell_quantum", p.dwell_quantum},
            {"projective_jitter", p.projective_jitter}}}};
}

void synth_from(const json& j, SynthConfig& s) {
  reject_unknown(j, {"kind", "videos", "frames", "viewport", "canvas", "fps", "seed", "object_area",
                     "photometric_noise", "trajectory"},
                 "synth");
  if (j.contains("kind")) s.kind = trajectory_kind_from_string(j.at("kind").get<std::string>());
  s.videos = j.value("videos", s.videos);
  s.frames = j.value("frames", s.frames);
  s.viewport = j.value("viewport", s.viewport);
  s.canvas = j.value("canvas", s.canvas);
  s.fps = j.value("fps", s.fps);
  s.seed = j.value("seed", s.seed);
  s.object_area = j.value("object_area", s.object_area);
  s.photometric_noise = j.value("photometric_noise", s.photometric_noise);
  if (j.contains("trajectory")) {
    const json& t = j.at("trajectory");
    reject_unknown(t, {"velocity", "acceleration", "switches", "cue_speed", "min_dwell", "max_dwell",
                       "static_probability", "cue_directions", "cue_lead", "dwell_quantum", "projective_jitter"},
                   "synth.trajectory");
    auto& p = s.params;
    if (t.contains("velocity")) p.velocity = vec_from(t.at("velocity"));
    if (t.contains("acceleration")) p.acceleration = vec_from(t.at("acceleration"));
    if (t.contains("switches")) {
      p.switches.clear();
      for (const auto& sw : t.at("switches")) p.switches.emplace_back(sw.at(0).get<int>(), vec_from(sw.at(1)));
    }
    p.cue_speed = t.value("cue_speed", p.cue_speed);
    p.min_dwell = t.value("min_dwell", p.min_dwell);
    p.max_dwell = t.value("max_dwell", p.max_dwell);
    p.static_probability = t.value("static_probability", p.static_probability);
    p.cue_directions = t.value("cue_directions", p.cue_directions);
    p.cue_lead = t.value("cue_lead", p.cue_lead);
    p.dwell_quantum = t.value("dwell_quantum", p.dwell_quantum);
    p.projective_jitter = t.value("projective_jitter", p.projective_jitter);
  }
}

json estimator_json(const EstimatorConfig& e) {
  return {{"max_corners", e.max_corners},
          {"min_distance", e.min_distance},
          {"window", e.window},
          {"search_radius", e.search_radius},
          {"ransac",
           {{"max_iters", e.ransac.max_iters},
            {"inlier_threshold", e.ransac.inlier_threshold},
            {"min_inlier_ratio", e.ransac.min_inlier_ratio},
            {"seed", e.ransac.seed}}}};
}

void estimator_from(const json& j, EstimatorConfig& e) {
  reject_unknown(j, {"max_corners", "min_distance", "window", "search_radius", "ransac"}, "estimator");
  e.max_corners = j.value("max_corners", e.max_corners);
  e.min_distance = j.value("min_distance", e.min_distance);
  e.window = j.value("window", e.window);
  e.search_radius = j.value("search_radius", e.search_radius);
  if (j.contains("ransac")) {
    const json& r = j.at("ransac");
    reject_unknown(r, {"max_iters", "inlier_threshold", "min_inlier_ratio", "seed"}, "estimator.ransac");
    e.ransac.max_iters = r.value("max_iters", e.ransac.max_iters);
    e.ransac.inlier_threshold = r.value("inlier_threshold", e.ransac.inlier_threshold);
    e.ransac.min_inlier_ratio = r.value("min_inlier_ratio", e.ransac.min_inlier_ratio);
    e.ransac.seed = r.value("seed", e.ransac.seed);
  }
}

bool is_input_error(const std::exception& e) {
  return dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const ParameterOutOfRange*>(&e) ||
         dynamic_cast<const NoCandidates*>(&e) || dynamic_cast<const EmptyDataset*>(&e);
}

template <typename Fn>
auto stage(const std::string& name, const LogFn& log, Fn&& fn) {
  if (log) log("[" + name + "]");
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what(), is_input_error(e));
  }
}

template <typename T>
std::vector<T> slice(const std::vector<T>& v, std::size_t begin, std::size_t end) {
  return {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end)};
}

std::vector<Clip> sample_split(const std::vector<MotionTrack>& tracks, double sigma, const ClipSpec& spec,
                               std::size_t count, std::uint64_t seed) {
  return importance_sample(std::span<const MotionTrack>(tracks), sigma, spec,
                           count == 0 ? std::numeric_limits<std::size_t>::max() : count, seed);
}

std::vector<GrayFrame> render_full(const SyntheticVideo& v, int threads) {
  SequenceRenderer r(v.scene, v.trajectory, v.options);
  std::vector<GrayFrame> frames(r.frame_count());
  parallel_for(frames.size(), threads, [&](std::size_t t) { frames[t] = r.frame(t); });
  return frames;
}

}  // namespace

void SynthConfig::validate() const {
  if (videos < 1) throw ParameterOutOfRange("synth.videos must be >= 1");
  if (frames < 2) throw ParameterOutOfRange("synth.frames must be >= 2");
  if (viewport < 8) throw ParameterOutOfRange("synth.viewport must be >= 8");
  if (canvas < 512 || canvas < 3 * viewport)
    throw ParameterOutOfRange("synth.canvas must be >= max(512, 3 * viewport)");
  if (dn < 1) throw ParameterOutOfRange("dn must be >= 1");
  if (frames <= dn) throw ParameterOutOfRange("synth.frames must exceed dn");
  if (object_area < 0 || object_area > 0.5) throw ParameterOutOfRange("synth.object_area must be in [0, 0.5]");
  if (photometric_noise < 0) throw ParameterOutOfRange("synth.photometric_noise must be >= 0");
}

std::string synthetic_video_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "vid%03d", index);
  return buf;
}

SyntheticVideo make_synthetic_video(const SynthConfig& cfg, int index) {
  cfg.validate();
  const auto i = static_cast<std::uint64_t>(index);
  SyntheticVideo v;
  v.video_id = synthetic_video_id(index);
  v.scene = generate_scene(derive_seed(cfg.seed, 3 * i), cfg.canvas);
  TrajectoryParams params = cfg.params;
  params.viewport = FrameGeometry(cfg.viewport, cfg.viewport);
  params.canvas_size = cfg.canvas;
  v.trajectory = generate_trajectory(cfg.kind, cfg.frames - 1, params, derive_seed(cfg.seed, 3 * i + 1));
  v.options.dn = cfg.dn;
  v.options.fps = cfg.fps;
  v.options.video_id = v.video_id;
  v.options.object_area = cfg.object_area;
  v.options.photometric_noise = cfg.photometric_noise;
  v.options.noise_seed = derive_seed(cfg.seed, 3 * i + 2);
  return v;
}

SyntheticDataset build_synthetic_dataset(const SynthConfig& cfg, int frame_size, int threads) {
  cfg.validate();
  SyntheticDataset out;
  out.tracks.resize(static_cast<std::size_t>(cfg.videos));
  out.videos.resize(static_cast<std::size_t>(cfg.videos));
  // Videos are rendered one at a time so only a single scene is alive.
  for (int i = 0; i < cfg.videos; ++i) {
    const SyntheticVideo v = make_synthetic_video(cfg, i);
    SequenceRenderer r(v.scene, v.trajectory, v.options);
    auto& vf = out.videos[static_cast<std::size_t>(i)];
    vf.video_id = v.video_id;
    vf.geometry = v.trajectory.viewport;
    vf.frames.resize(r.frame_count());
    parallel_for(r.frame_count(), threads, [&](std::size_t t) {
      GrayFrame f = r.frame(t);
      vf.frames[t] = frame_size > 0 ? downsample_area(f, frame_size, frame_size) : std::move(f);
    });
    out.tracks[static_cast<std::size_t>(i)] = r.truth();
  }
  out.sigma = compute_sigma(std::span<const MotionTrack>(out.tracks));
  for (const auto& track : out.tracks)
    for (std::size_t n = 0; n < track.entries.size(); ++n)
      out.labels[{track.video_id, static_cast<int>(n)}] = classify(*track.entries[n], out.sigma, track.geometry);
  return out;
}

void write_synthetic_dataset(const SynthConfig& cfg, const fs::path& out, int threads) {
  const SyntheticDataset data = build_synthetic_dataset(cfg, 0, threads);
  for (std::size_t i = 0; i < data.videos.size(); ++i) {
    const auto& v = data.videos[i];
    const fs::path dir = out / "frames" / v.video_id;
    fs::create_directories(dir);
    parallel_for(v.frames.size(), threads, [&](std::size_t t) {
      char name[32];
      std::snprintf(name, sizeof name, "%06zu.png", t);
      write_png(dir / name, v.frames[t]);
    });
    fs::create_directories(out / "tracks");
    write_track(out / "tracks" / (v.video_id + ".jsonl"), data.tracks[i]);
  }
  write_labels(out / "labels.csv", data.labels);
}

MotionTrack estimate_track(const std::vector<GrayFrame>& frames, const std::string& video_id, int dn, double fps,
                           const EstimatorConfig& cfg, int threads) {
  if (dn < 1) throw ParameterOutOfRange("dn must be >= 1");
  if (frames.size() < static_cast<std::size_t>(dn) + 1) throw InvalidInput("need at least dn + 1 frames");
  MotionTrack track;
  track.video_id = video_id;
  track.dn = dn;
  track.fps = fps;
  track.geometry = frames.front().geometry();
  track.entries.resize(frames.size() - static_cast<std::size_t>(dn));
  parallel_for(track.entries.size(), threads, [&](std::size_t n) {
    EstimatorConfig local = cfg;
    local.ransac.seed = derive_seed(cfg.ransac.seed, n);
    try {
      track.entries[n] = estimate_motion(frames[n], frames[n + static_cast<std::size_t>(dn)], local);
    } catch (const TooFewFeatures&) {
    } catch (const NoConsensus&) {
    } catch (const DegenerateConfiguration&) {
    } catch (const Singular&) {
    }
  });
  return track;
}

std::vector<VideoFrames> load_video_frames(const fs::path& frames_root, const std::vector<MotionTrack>& tracks,
                                           int frame_size, int threads) {
  std::vector<VideoFrames> out;
  for (const auto& track : tracks) {
    const auto files = list_frame_files(frames_root / track.video_id);
    if (files.size() < track.frame_count())
      throw InvalidInput("video " + track.video_id + " has fewer frames than its track");
    VideoFrames vf;
    vf.video_id = track.video_id;
    vf.geometry = track.geometry;
    vf.frames.resize(files.size());
    parallel_for(files.size(), threads, [&](std::size_t t) {
      GrayFrame f = read_frame(files[t]);
      vf.frames[t] = frame_size > 0 ? downsample_area(f, frame_size, frame_size) : std::move(f);
    });
    out.push_back(std::move(vf));
  }
  return out;
}

void PipelineConfig::validate() const {
  try {
    clips.validate();
    if (data_dir.empty()) synth.validate();
    train.validate();
    estimator.ransac.validate();
  } catch (const ParameterOutOfRange& e) {
    throw InvalidInput(e.what());
  }
  if (frame_size < 4) throw InvalidInput("frame_size must be >= 4");
  if (train_videos < 1) throw InvalidInput("split.train_videos must be >= 1");
  if (val_videos < 0) throw InvalidInput("split.val_videos must be >= 0");
  if (data_dir.empty() && synth.videos < train_videos + val_videos + 1)
    throw InvalidInput("synth.videos must leave at least one test video");
  if (threads < 1) throw InvalidInput("threads must be >= 1");
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  json j;
  j["data_dir"] = cfg.data_dir;
  j["synth"] = synth_json(cfg.synth);
  j["clips"] = {{"n", cfg.clips.n}, {"m", cfg.clips.m}, {"dn", cfg.clips.dn}, {"dc", cfg.clips.dc}};
  j["frame_size"] = cfg.frame_size;
  j["split"] = {{"train_videos", cfg.train_videos}, {"val_videos", cfg.val_videos}};
  j["train_clips"] = cfg.train_clips;
  j["val_clips"] = cfg.val_clips;
  j["test_clips"] = cfg.test_clips;
  j["sampling_seed"] = cfg.sampling_seed;
  j["estimate_targets"] = cfg.estimate_targets;
  j["estimator"] = estimator_json(cfg.estimator);
  j["train"] = json::parse(train_config_to_json(cfg.train));
  return j.dump();
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  PipelineConfig cfg;
  try {
    const json j = json::parse(text);
    reject_unknown(j, {"data_dir", "synth", "clips", "frame_size", "split", "train_clips", "val_clips", "test_clips",
                       "sampling_seed", "estimate_targets", "estimator", "train", "threads"},
                   "config");
    cfg.data_dir = j.value("data_dir", cfg.data_dir);
    if (j.contains("synth")) synth_from(j.at("synth"), cfg.synth);
    if (j.contains("clips")) {
      const json& c = j.at("clips");
      reject_unknown(c, {"n", "m", "dn", "dc"}, "clips");
      cfg.clips.n = c.value("n", cfg.clips.n);
      cfg.clips.m = c.value("m", cfg.clips.m);
      cfg.clips.dn = c.value("dn", cfg.clips.dn);
      cfg.clips.dc = c.value("dc", cfg.clips.dc);
    }
    cfg.frame_size = j.value("frame_size", cfg.frame_size);
    if (j.contains("split")) {
      const json& s = j.at("split");
      reject_unknown(s, {"train_videos", "val_videos"}, "split");
      cfg.train_videos = s.value("train_videos", cfg.train_videos);
      cfg.val_videos = s.value("val_videos", cfg.val_videos);
    }
    cfg.train_clips = j.value("train_clips", cfg.train_clips);
    cfg.val_clips = j.value("val_clips", cfg.val_clips);
    cfg.test_clips = j.value("test_clips", cfg.test_clips);
    cfg.sampling_seed = j.value("sampling_seed", cfg.sampling_seed);
    cfg.estimate_targets = j.value("estimate_targets", cfg.estimate_targets);
    if (j.contains("estimator")) estimator_from(j.at("estimator"), cfg.estimator);
    if (j.contains("train")) cfg.train = train_config_from_json(j.at("train").dump());
    cfg.threads = j.value("threads", cfg.threads);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed pipeline config: ") + e.what());
  } catch (const ParameterOutOfRange& e) {
    throw InvalidInput(e.what());
  }
  cfg.synth.dn = cfg.clips.dn;
  cfg.train.threads = cfg.threads;
  cfg.validate();
  return cfg;
}

std::string describe_plan(const PipelineConfig& cfg) {
  std::ostringstream out;
  if (cfg.data_dir.empty())
    out << "data: synthesize " << cfg.synth.videos << " " << to_string(cfg.synth.kind) << " videos x "
        << cfg.synth.frames << " frames (" << cfg.synth.viewport << "px, seed " << cfg.synth.seed << ")\n";
  else
    out << "data: load frames and tracks from " << cfg.data_dir << "\n";
  if (cfg.estimate_targets) out << "targets: estimate_motion at dn=" << cfg.clips.dn << "\n";
  else out << "targets: tracks as provided\n";
  const auto count = [](std::size_t c) { return c == 0 ? std::string("all") : std::to_string(c); };
  out << "split: " << cfg.train_videos << " train / " << cfg.val_videos << " val / rest test videos\n"
      << "sampling: N=" << cfg.clips.n << " M=" << cfg.clips.m << " dn=" << cfg.clips.dn << " dc=" << cfg.clips.dc
      << ", clips train=" << count(cfg.train_clips) << " val=" << count(cfg.val_clips)
      << " test=" << count(cfg.test_clips) << ", seed " << cfg.sampling_seed << "\n"
      << "train: " << cfg.train.epochs << " epochs, batch " << cfg.train.batch_size << ", lr "
      << cfg.train.learning_rate << ", lambda " << cfg.train.lambda << ", " << cfg.train.optimizer << ", seed "
      << cfg.train.seed << "\n"
      << "evaluate: predictor vs taylor_o1, taylor_o2 on test clips\n";
  return out.str();
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const fs::path& out, const LogFn& log) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  PipelineResult result;

  struct Data {
    std::vector<MotionTrack> tracks;
    std::vector<VideoFrames> videos;
    LabelTable labels;
  };
  Data data = stage("data", log, [&] {
    Data d;
    if (cfg.data_dir.empty()) {
      SynthConfig synth = cfg.synth;
      synth.dn = cfg.clips.dn;
      SyntheticDataset s = build_synthetic_dataset(synth, cfg.frame_size, cfg.threads);
      d.tracks = std::move(s.tracks);
      d.videos = std::move(s.videos);
      d.labels = std::move(s.labels);
      if (cfg.estimate_targets)
        for (int i = 0; i < synth.videos; ++i) {
          const SyntheticVideo v = make_synthetic_video(synth, i);
          d.tracks[static_cast<std::size_t>(i)] = estimate_track(render_full(v, cfg.threads), v.video_id, synth.dn,
                                                                 synth.fps, cfg.estimator, cfg.threads);
        }
    } else {
      const fs::path root(cfg.data_dir);
      d.tracks = read_tracks(root / "tracks");
      if (d.tracks.empty()) throw InvalidInput("no tracks in " + (root / "tracks").string());
      if (cfg.estimate_targets)
        for (auto& t : d.tracks) {
          const auto full = load_video_frames(root / "frames", {t}, 0, cfg.threads);
          t = estimate_track(full.front().frames, t.video_id, cfg.clips.dn, t.fps, cfg.estimator, cfg.threads);
        }
      for (const auto& t : d.tracks)
        if (t.dn != cfg.clips.dn) throw InvalidInput("track " + t.video_id + " has dn != clips.dn");
      d.videos = load_video_frames(root / "frames", d.tracks, cfg.frame_size, cfg.threads);
      if (fs::exists(root / "labels.csv")) d.labels = read_labels(root / "labels.csv");
    }
    return d;
  });

  const std::size_t nv = data.tracks.size();
  const auto ntrain = static_cast<std::size_t>(cfg.train_videos);
  const auto nval = static_cast<std::size_t>(cfg.val_videos);
  if (nv < ntrain + nval + 1)
    throw PipelineError("split", "need at least " + std::to_string(ntrain + nval + 1) + " videos, have " +
                                     std::to_string(nv), true);

  struct Splits {
    ClipDataset train, val, test;
  };
  Splits splits = stage("sampling", log, [&] {
    const auto train_tracks = slice(data.tracks, 0, ntrain);
    result.sigma = compute_sigma(std::span<const MotionTrack>(train_tracks));
    const auto make = [&](std::size_t b, std::size_t e, std::size_t count, std::uint64_t key) {
      const auto tracks = slice(data.tracks, b, e);
      auto clips = sample_split(tracks, result.sigma, cfg.clips, count, derive_seed(cfg.sampling_seed, key));
      return ClipDataset(cfg.clips, slice(data.videos, b, e), tracks, std::move(clips));
    };
    Splits s;
    s.train = make(0, ntrain, cfg.train_clips, 0);
    if (nval > 0) s.val = make(ntrain, ntrain + nval, cfg.val_clips, 1);
    s.test = make(ntrain + nval, nv, cfg.test_clips, 2);
    return s;
  });
  result.train_clips = splits.train.size();
  result.val_clips = splits.val.size();
  result.test_clips = splits.test.size();
  if (log) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "sigma %.4f, clips train=%zu val=%zu test=%zu", result.sigma, result.train_clips,
                  result.val_clips, result.test_clips);
    log(buf);
  }

  TrainConfig tcfg = cfg.train;
  tcfg.threads = cfg.threads;
  result.training = stage("train", log, [&] { return train(splits.train, splits.val, tcfg); });
  if (log && !result.training.log.empty()) {
    for (const auto& e : result.training.log) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "epoch %d %s loss %.4f mpd %.4f lr %.2e", e.epoch, e.split.c_str(), e.loss,
                    e.mpd, e.lr);
      log(buf);
    }
  }

  result.report = stage("evaluate", log, [&] {
    MethodPredictions preds;
    preds.emplace_back("predictor", predict_clips(result.training.model, splits.test, cfg.threads));
    preds.emplace_back("taylor_o1", baseline_predictions(splits.test, 1));
    preds.emplace_back("taylor_o2", baseline_predictions(splits.test, 2));
    const auto labels = data.labels.empty() ? std::vector<std::optional<MotionClass>>{}
                                            : clip_labels(splits.test, data.labels);
    EvalReport report = evaluate(splits.test, preds, labels, cfg.threads);
    report.config_json = pipeline_config_to_json(cfg);
    return report;
  });
  result.report_hash = report_hash(result.report);

  if (!out.empty()) {
    stage("write", log, [&] {
      fs::create_directories(out);
      save_model(out / "model.json", result.training.model);
      write_file_atomic(out / "loss_log.csv", loss_log_csv(result.training.log));
      write_clip_index(out / "clips_train.json", {cfg.clips, result.sigma, splits.train.clips()});
      write_clip_index(out / "clips_val.json", {cfg.clips, result.sigma, splits.val.clips()});
      write_clip_index(out / "clips_test.json", {cfg.clips, result.sigma, splits.test.clips()});
      write_report(out / "report", result.report);
      RunManifest m;
      m.command = "pipeline";
      m.config_json = pipeline_config_to_json(cfg);
      m.seeds = {{"synth", cfg.synth.seed}, {"sampling", cfg.sampling_seed}, {"train", cfg.train.seed},
                 {"augmentation", cfg.train.augmentation.seed}};
      if (!cfg.data_dir.empty()) m.add_input(cfg.data_dir);
      m.outputs = {"model.json", "loss_log.csv", "clips_train.json", "clips_val.json", "clips_test.json", "report/"};
      m.version = tool_version();
      m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_manifest(out, m);
      return 0;
    });
  }
  return result;
}

}  // namespace homoflow
