#include "homoflow_cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "homoflow/evaluation.hpp"
#include "homoflow/manifest.hpp"
#include "homoflow/motion_classify.hpp"
#include "homoflow/pipeline.hpp"
#include "homoflow/predictor.hpp"
#include "homoflow/sampling.hpp"
#include "homoflow/track.hpp"

namespace homoflow::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class QualityGate : public Error {
 public:
  using Error::Error;
};

int default_threads() {
  if (const char* env = std::getenv("HOMOFLOW_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::logic_error&) {
    }
  }
  return 1;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Manifest beside a file output, or inside a directory output.
void write_manifest_for(const fs::path& out, RunManifest m, Clock::time_point t0) {
  m.version = tool_version();
  m.wall_time_s = seconds_since(t0);
  if (fs::is_directory(out)) {
    write_manifest(out, m);
  } else {
    fs::path p = out;
    p += ".manifest.json";
    write_file_atomic(p, m.to_json());
  }
}

std::vector<MotionTrack> load_tracks(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidInput("no such track path " + path.string());
  auto tracks = fs::is_directory(path) ? read_tracks(path) : std::vector<MotionTrack>{read_track(path)};
  if (tracks.empty()) throw InvalidInput("no tracks in " + path.string());
  return tracks;
}

fs::path frames_root(const std::string& frames, const fs::path& tracks) {
  if (!frames.empty()) return frames;
  const fs::path dir = fs::is_directory(tracks) ? tracks : tracks.parent_path();
  return fs::absolute(dir).lexically_normal().parent_path() / "frames";
}

ClipDataset load_dataset(const ClipIndex& index, const std::vector<MotionTrack>& all, const fs::path& frames,
                         int frame_size, int threads) {
  std::set<std::string> used;
  for (const auto& c : index.clips) used.insert(c.video_id);
  std::vector<MotionTrack> tracks;
  for (const auto& t : all)
    if (used.count(t.video_id)) tracks.push_back(t);
  if (tracks.size() != used.size()) throw InvalidInput("clip index references videos without a track");
  auto videos = load_video_frames(frames, tracks, frame_size, threads);
  return ClipDataset(index.spec, std::move(videos), std::move(tracks), index.clips);
}

json motions_json(const MotionSequence& seq) {
  json a = json::array();
  for (const auto& d : seq)
    for (double v : d.to_array()) a.push_back(v);
  return a;
}

// --- synth ---------------------------------------------------------------

struct SynthOpts {
  std::string kind = "cue";
  int frames = 3000;
  int videos = 1;
  std::uint64_t seed = 1;
  std::string out;
  int viewport = 128;
  int canvas = 1024;
  int dn = 5;
  double object_area = 0.0;
  double noise = 0.0;
  int cue_lead = 0;
  int dwell_quantum = 5;
  std::vector<double> velocity;
};

int cmd_synth(const SynthOpts& o, int threads, std::ostream& out) {
  const auto t0 = Clock::now();
  SynthConfig cfg;
  cfg.kind = trajectory_kind_from_string(o.kind);
  cfg.frames = o.frames;
  cfg.videos = o.videos;
  cfg.seed = o.seed;
  cfg.viewport = o.viewport;
  cfg.canvas = o.canvas;
  cfg.dn = o.dn;
  cfg.object_area = o.object_area;
  cfg.photometric_noise = o.noise;
  cfg.params.cue_lead = o.cue_lead;
  cfg.params.dwell_quantum = o.dwell_quantum;
  if (!o.velocity.empty()) cfg.params.velocity = Vec2(o.velocity.at(0), o.velocity.at(1));
  cfg.validate();
  fs::create_directories(o.out);
  write_synthetic_dataset(cfg, o.out, threads);
  RunManifest m;
  m.command = "synth gen";
  PipelineConfig echo;
  echo.synth = cfg;
  m.config_json = json::parse(pipeline_config_to_json(echo)).at("synth").dump();
  m.seeds = {{"synth", cfg.seed}};
  m.outputs = {"frames/", "tracks/", "labels.csv"};
  write_manifest_for(o.out, m, t0);
  out << "wrote " << cfg.videos << " video(s) x " << cfg.frames << " frames to " << o.out << "\n";
  return kOk;
}

// --- estimate --------------------------------------------------------------

struct EstimateOpts {
  std::string frames;
  int dn = 5;
  std::string out;
  std::string video_id;
  EstimatorConfig est;
};

int cmd_estimate(const EstimateOpts& o, int threads, std::ostream& out) {
  const auto t0 = Clock::now();
  if (!fs::is_directory(o.frames)) throw InvalidInput("not a directory: " + o.frames);
  const auto files = list_frame_files(o.frames);
  if (files.size() < static_cast<std::size_t>(o.dn) + 1)
    throw InvalidInput("need at least dn + 1 = " + std::to_string(o.dn + 1) + " frames in " + o.frames);
  std::vector<GrayFrame> frames(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) frames[i] = read_frame(files[i]);
  const std::string id = o.video_id.empty() ? fs::path(o.frames).lexically_normal().filename().string() : o.video_id;
  const MotionTrack track = estimate_track(frames, id, o.dn, 25.0, o.est, threads);
  fs::create_directories(fs::absolute(o.out).parent_path());
  write_track(o.out, track);
  const std::size_t missing = track.entries.size() - track.present_count();
  out << id << ": " << track.entries.size() << " entries, " << missing << " missing\n";
  if (2 * missing > track.entries.size())
    throw QualityGate("more than 50% of the motion estimates are missing (" + std::to_string(missing) + "/" +
                      std::to_string(track.entries.size()) + ")");
  RunManifest m;
  m.command = "estimate";
  json cfg = {{"dn", o.dn}, {"video_id", id}, {"max_corners", o.est.max_corners}, {"min_distance", o.est.min_distance},
              {"window", o.est.window}, {"search_radius", o.est.search_radius},
              {"ransac", {{"max_iters", o.est.ransac.max_iters}, {"inlier_threshold", o.est.ransac.inlier_threshold},
                          {"min_inlier_ratio", o.est.ransac.min_inlier_ratio}, {"seed", o.est.ransac.seed}}}};
  m.config_json = cfg.dump();
  m.seeds = {{"ransac", o.est.ransac.seed}};
  m.add_input(o.frames);
  m.outputs = {o.out};
  write_manifest_for(o.out, m, t0);
  return kOk;
}

// --- classify --------------------------------------------------------------

struct ClassifyOpts {
  std::string tracks;
  std::optional<double> sigma;
  std::string out;
};

int cmd_classify(const ClassifyOpts& o, std::ostream& out) {
  const auto t0 = Clock::now();
  const auto tracks = load_tracks(o.tracks);
  const double sigma = o.sigma ? *o.sigma : compute_sigma(std::span<const MotionTrack>(tracks));
  fs::create_directories(o.out);
  LabelTable labels;
  std::array<std::size_t, kAllMotionClasses.size()> pooled{};
  std::size_t total = 0;
  for (const auto& t : tracks) {
    const MotionDistribution d = distribution(t, sigma, t.geometry);
    write_file_atomic(fs::path(o.out) / (t.video_id + ".json"), d.to_json());
    write_file_atomic(fs::path(o.out) / (t.video_id + ".csv"), d.to_csv());
    write_file_atomic(fs::path(o.out) / (t.video_id + ".svg"), d.to_svg());
    for (std::size_t c = 0; c < pooled.size(); ++c) pooled[c] += d.counts[c];
    total += d.total;
    for (std::size_t n = 0; n < t.entries.size(); ++n)
      if (t.entries[n]) labels[{t.video_id, static_cast<int>(n)}] = classify(*t.entries[n], sigma, t.geometry);
  }
  write_labels(fs::path(o.out) / "labels.csv", labels);
  char buf[96];
  std::snprintf(buf, sizeof buf, "sigma %.6f over %zu entries\n", sigma, total);
  out << buf;
  for (std::size_t c = 0; c < pooled.size(); ++c) {
    std::snprintf(buf, sizeof buf, "%-13s %8zu  %6.2f%%\n", std::string(to_string(kAllMotionClasses[c])).c_str(),
                  pooled[c], total ? 100.0 * static_cast<double>(pooled[c]) / static_cast<double>(total) : 0.0);
    out << buf;
  }
  RunManifest m;
  m.command = "classify";
  m.config_json = json{{"sigma", sigma}}.dump();
  m.add_input(o.tracks);
  m.outputs = {"<video>.json", "<video>.csv", "<video>.svg", "labels.csv"};
  write_manifest_for(o.out, m, t0);
  return kOk;
}

// --- sample ----------------------------------------------------------------

struct SampleOpts {
  std::string tracks;
  ClipSpec spec;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::optional<double> sigma;
  std::string out;
};

int cmd_sample(const SampleOpts& o, std::ostream& out) {
  const auto t0 = Clock::now();
  o.spec.validate();
  const auto tracks = load_tracks(o.tracks);
  const double sigma = o.sigma ? *o.sigma : compute_sigma(std::span<const MotionTrack>(tracks));
  std::size_t all = 0, candidates = 0;
  for (const auto& t : tracks) {
    all += enumerate_clips(t, o.spec).size();
    candidates += candidate_starts(t, sigma, o.spec).size();
  }
  const auto clips = importance_sample(std::span<const MotionTrack>(tracks), sigma, o.spec,
                                       o.count == 0 ? std::numeric_limits<std::size_t>::max() : o.count, o.seed);
  fs::create_directories(fs::absolute(o.out).parent_path());
  write_clip_index(o.out, {o.spec, sigma, clips});
  char buf[160];
  std::snprintf(buf, sizeof buf, "sigma %.6f: %zu complete clips, %zu anchored candidates, %zu sampled\n", sigma, all,
                candidates, clips.size());
  out << buf;
  RunManifest m;
  m.command = "sample";
  m.config_json = json{{"n", o.spec.n}, {"m", o.spec.m}, {"dn", o.spec.dn}, {"dc", o.spec.dc}, {"count", o.count},
                       {"sigma", sigma}}.dump();
  m.seeds = {{"sampling", o.seed}};
  m.add_input(o.tracks);
  m.outputs = {o.out};
  write_manifest_for(o.out, m, t0);
  return kOk;
}

// --- train -----------------------------------------------------------------

struct TrainOpts {
  std::string clips;
  std::string val_clips;
  std::string tracks;
  std::string frames;
  std::string config;
  std::string out;
  std::string log;
  int frame_size = 32;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<double> lambda;
  std::optional<int> batch_size;
};

int cmd_train(const TrainOpts& o, int threads, std::ostream& out) {
  const auto t0 = Clock::now();
  TrainConfig cfg = o.config.empty() ? TrainConfig{} : train_config_from_json(read_text(o.config));
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.seed) cfg.seed = *o.seed;
  if (o.lr) cfg.learning_rate = *o.lr;
  if (o.lambda) cfg.lambda = *o.lambda;
  if (o.batch_size) cfg.batch_size = *o.batch_size;
  cfg.threads = threads;
  cfg.validate();
  const auto tracks = load_tracks(o.tracks);
  const fs::path root = frames_root(o.frames, o.tracks);
  const ClipDataset training = load_dataset(read_clip_index(o.clips), tracks, root, o.frame_size, threads);
  const ClipDataset validation =
      o.val_clips.empty() ? ClipDataset{}
                          : load_dataset(read_clip_index(o.val_clips), tracks, root, o.frame_size, threads);
  const TrainResult result = train(training, validation, cfg);
  fs::create_directories(fs::absolute(o.out).parent_path());
  save_model(o.out, result.model);
  const fs::path log = o.log.empty() ? fs::absolute(o.out).parent_path() / "loss_log.csv" : fs::path(o.log);
  write_file_atomic(log, loss_log_csv(result.log));
  for (const auto& e : result.log) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "epoch %3d %-5s loss %.4f mpd %.4f lr %.2e\n", e.epoch, e.split.c_str(), e.loss,
                  e.mpd, e.lr);
    out << buf;
  }
  RunManifest m;
  m.command = "train";
  m.config_json = json{{"train", json::parse(train_config_to_json(cfg))}, {"frame_size", o.frame_size}}.dump();
  m.seeds = {{"train", cfg.seed}, {"augmentation", cfg.augmentation.seed}};
  m.add_input(o.clips);
  if (!o.val_clips.empty()) m.add_input(o.val_clips);
  m.add_input(o.tracks);
  m.outputs = {o.out, log.string()};
  write_manifest_for(o.out, m, t0);
  return kOk;
}

// --- predict / eval ----------------------------------------------------------

struct PredictOpts {
  std::string clips;
  std::string model;
  std::string tracks;
  std::string frames;
  std::string labels;
  std::string out;
  int overlays = 4;
};

struct Loaded {
  PredictorModel model;
  ClipIndex index;
  ClipDataset data;
  MethodPredictions preds;
};

Loaded load_and_predict(const PredictOpts& o, int threads) {
  Loaded l;
  l.model = load_model(o.model);
  l.index = read_clip_index(o.clips);
  if (l.index.spec.n != l.model.arch.recall || l.index.spec.m != l.model.arch.preview)
    throw InvalidInput("clip horizons do not match the model architecture");
  const auto tracks = load_tracks(o.tracks);
  l.data = load_dataset(l.index, tracks, frames_root(o.frames, o.tracks), l.model.arch.frame_size, threads);
  l.preds.emplace_back("predictor", predict_clips(l.model, l.data, threads));
  l.preds.emplace_back("taylor_o1", baseline_predictions(l.data, 1));
  l.preds.emplace_back("taylor_o2", baseline_predictions(l.data, 2));
  return l;
}

int cmd_predict(const PredictOpts& o, int threads, std::ostream& out) {
  const auto t0 = Clock::now();
  const Loaded l = load_and_predict(o, threads);
  std::ostringstream lines;
  for (std::size_t i = 0; i < l.data.size(); ++i) {
    json j = {{"video_id", l.data.clips()[i].video_id}, {"start", l.data.clips()[i].start}};
    for (const auto& [name, p] : l.preds) j[name] = motions_json(p[i]);
    j["target"] = motions_json(l.data.targets(i));
    lines << j.dump() << "\n";
  }
  write_file_atomic(o.out, lines.str());
  out << "predicted " << l.data.size() << " clips\n";
  RunManifest m;
  m.command = "predict";
  m.add_input(o.clips);
  m.add_input(o.model);
  m.add_input(o.tracks);
  m.outputs = {o.out};
  write_manifest_for(o.out, m, t0);
  return kOk;
}

int cmd_eval(const PredictOpts& o, int threads, std::ostream& out) {
  const auto t0 = Clock::now();
  const Loaded l = load_and_predict(o, threads);
  std::vector<std::optional<MotionClass>> labels;
  if (!o.labels.empty()) labels = clip_labels(l.data, read_labels(o.labels));
  EvalReport report = evaluate(l.data, l.preds, labels, threads);
  report.config_json = json{{"clips", o.clips}, {"model", o.model}, {"sigma", l.index.sigma}}.dump();
  const fs::path dir(o.out);
  write_report(dir, report);

  // Overlays of the first clips: last recall frame warped onto the next one.
  const fs::path root = frames_root(o.frames, o.tracks);
  const std::size_t shown = std::min<std::size_t>(l.data.size(), static_cast<std::size_t>(std::max(o.overlays, 0)));
  for (std::size_t i = 0; i < shown; ++i) {
    const Clip& clip = l.data.clips()[i];
    const auto files = list_frame_files(root / clip.video_id);
    const auto a = static_cast<std::size_t>(clip.recall_end());
    const auto b = a + static_cast<std::size_t>(l.data.spec().dn);
    if (b >= files.size()) continue;
    const GrayFrame past = read_frame(files[a]), current = read_frame(files[b]);
    auto overlay = [&](const std::string& name, const FourPointDelta& d) {
      write_png(dir / (clip.video_id + "_" + std::to_string(a) + "_" + name + ".png"), warp_overlay(past, current, d));
    };
    for (const auto& [name, p] : l.preds) overlay(name, p[i].front());
    overlay("target", l.data.targets(i).front());
  }

  char buf[128];
  for (const auto& m : report.methods) {
    std::snprintf(buf, sizeof buf, "%-10s MPD %.3f +- %.3f px (%zu clips)\n", m.method.c_str(), m.mpd.mean, m.mpd.std,
                  m.count);
    out << buf;
  }
  for (const auto& [name, t] : report.agreement) {
    std::snprintf(buf, sizeof buf, "%-10s label agreement %.3f (%zu clips, %zu abstentions)\n", name.c_str(),
                  t.agreement(), t.count, t.abstain);
    out << buf;
  }
  out << "report hash " << report_hash(report) << "\n";
  RunManifest m;
  m.command = "eval";
  m.config_json = report.config_json;
  m.add_input(o.clips);
  m.add_input(o.model);
  m.add_input(o.tracks);
  if (!o.labels.empty()) m.add_input(o.labels);
  m.outputs = {"report.json", "report.csv", "*.svg", "*.png"};
  write_manifest_for(dir, m, t0);
  return kOk;
}

// --- bench -----------------------------------------------------------------

struct BenchOpts {
  std::vector<std::string> estimators{"ransac", "dlt-all"};
  int length = 15;
  int repeats = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_bench(const BenchOpts& o, std::ostream& out) {
  const auto t0 = Clock::now();
  std::vector<NamedEstimator> chosen;
  const auto all = default_estimators();
  for (const auto& name : o.estimators) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const NamedEstimator& e) { return e.name == name; });
    if (it == all.end()) throw InvalidInput("unknown estimator '" + name + "'");
    chosen.push_back(*it);
  }
  const auto rows = run_benchmark(chosen, o.length, o.repeats, o.seed);
  const std::string table = benchmark_table(rows);
  out << table;
  if (!o.out.empty()) {
    write_file_atomic(o.out, table);
    RunManifest m;
    m.command = "bench";
    m.config_json = json{{"estimators", o.estimators}, {"length", o.length}, {"repeats", o.repeats}}.dump();
    m.seeds = {{"sequence", o.seed}};
    m.outputs = {o.out};
    write_manifest_for(o.out, m, t0);
  }
  return kOk;
}

// --- pipeline --------------------------------------------------------------

struct PipelineOpts {
  std::string config;
  std::string out;
  bool dry_run = false;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int cmd_pipeline(const PipelineOpts& o, int threads, std::ostream& out) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : pipeline_config_from_json(read_text(o.config));
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.seed) cfg.train.seed = *o.seed;
  cfg.threads = threads;
  cfg.train.threads = threads;
  cfg.validate();
  if (o.dry_run) {
    out << describe_plan(cfg) << "config " << json::parse(pipeline_config_to_json(cfg)).dump(2) << "\n";
    return kOk;
  }
  if (o.out.empty()) throw InvalidInput("--out is required unless --dry-run is given");
  LogFn log;
  if (!o.quiet) log = [&out](const std::string& line) { out << line << "\n" << std::flush; };
  const PipelineResult r = run_pipeline(cfg, o.out, log);
  char buf[128];
  for (const auto& m : r.report.methods) {
    std::snprintf(buf, sizeof buf, "%-10s MPD %.3f +- %.3f px (%zu clips)\n", m.method.c_str(), m.mpd.mean, m.mpd.std,
                  m.count);
    out << buf;
  }
  out << "report hash " << r.report_hash << "\n";
  return kOk;
}

bool is_bad_input(const std::exception& e) {
  return dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const ParameterOutOfRange*>(&e) ||
         dynamic_cast<const NoCandidates*>(&e) || dynamic_cast<const EmptyDataset*>(&e) ||
         dynamic_cast<const EmptyTrack*>(&e) || dynamic_cast<const LabelMismatch*>(&e) ||
         dynamic_cast<const DimensionMismatch*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Camera-motion estimation, sampling, prediction and evaluation", "homoflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());
  int threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default: HOMOFLOW_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  SynthOpts synth;
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic planar-scene videos with exact motion");
  synth_cmd->require_subcommand(1);
  auto* gen = synth_cmd->add_subcommand("gen", "Render frames, truth tracks and labels");
  gen->add_option("--kind", synth.kind, "constant|accel|switch|cue|projective")->capture_default_str();
  gen->add_option("--frames", synth.frames, "Frames per video")->capture_default_str();
  gen->add_option("--videos", synth.videos)->capture_default_str();
  gen->add_option("--seed", synth.seed)->capture_default_str();
  gen->add_option("--out", synth.out)->required();
  gen->add_option("--viewport", synth.viewport, "Frame side in pixels")->capture_default_str();
  gen->add_option("--canvas", synth.canvas, "Scene side in pixels")->capture_default_str();
  gen->add_option("--dn", synth.dn, "Frame increment of the truth tracks")->capture_default_str();
  gen->add_option("--object-area", synth.object_area, "Area fraction of an independently moving patch");
  gen->add_option("--noise", synth.noise, "Per-pixel Gaussian noise std");
  gen->add_option("--cue-lead", synth.cue_lead, "Steps by which the cue marker leads the motion")
      ->capture_default_str();
  gen->add_option("--dwell-quantum", synth.dwell_quantum, "Cue segments last multiples of this many steps")
      ->capture_default_str();
  gen->add_option("--velocity", synth.velocity, "Per-step translation x y")->expected(2);

  EstimateOpts est;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate the motion track of a frame directory");
  est_cmd->add_option("--frames", est.frames, "Directory of PNG/PGM frames")->required();
  est_cmd->add_option("--dn", est.dn)->capture_default_str();
  est_cmd->add_option("--out", est.out, "Track file (.jsonl)")->required();
  est_cmd->add_option("--video-id", est.video_id, "Defaults to the directory name");
  est_cmd->add_option("--max-corners", est.est.max_corners)->capture_default_str();
  est_cmd->add_option("--window", est.est.window)->capture_default_str();
  est_cmd->add_option("--search-radius", est.est.search_radius)->capture_default_str();
  est_cmd->add_option("--ransac-iters", est.est.ransac.max_iters)->capture_default_str();
  est_cmd->add_option("--threshold", est.est.ransac.inlier_threshold)->capture_default_str();
  est_cmd->add_option("--min-inlier-ratio", est.est.ransac.min_inlier_ratio)->capture_default_str();
  est_cmd->add_option("--seed", est.est.ransac.seed)->capture_default_str();

  ClassifyOpts cls;
  auto* cls_cmd = app.add_subcommand("classify", "Motion-class distribution and labels of tracks");
  cls_cmd->add_option("--tracks", cls.tracks, "Track file or directory")->required();
  cls_cmd->add_option("--sigma", cls.sigma, "Static threshold (default: pooled std of magnitudes)");
  cls_cmd->add_option("--out", cls.out)->required();

  SampleOpts smp;
  auto* smp_cmd = app.add_subcommand("sample", "Importance-sample clips anchored at significant motion");
  smp_cmd->add_option("--tracks", smp.tracks)->required();
  smp_cmd->add_option("--n", smp.spec.n, "Recall horizon")->capture_default_str();
  smp_cmd->add_option("--m", smp.spec.m, "Preview horizon")->capture_default_str();
  smp_cmd->add_option("--dn", smp.spec.dn)->capture_default_str();
  smp_cmd->add_option("--dc", smp.spec.dc, "Clip start stride")->capture_default_str();
  smp_cmd->add_option("--count", smp.count, "0 keeps every candidate")->capture_default_str();
  smp_cmd->add_option("--seed", smp.seed)->capture_default_str();
  smp_cmd->add_option("--sigma", smp.sigma);
  smp_cmd->add_option("--out", smp.out, "Clip index (.json)")->required();

  TrainOpts trn;
  auto* trn_cmd = app.add_subcommand("train", "Train the motion predictor");
  trn_cmd->add_option("--clips", trn.clips)->required();
  trn_cmd->add_option("--val-clips", trn.val_clips);
  trn_cmd->add_option("--tracks", trn.tracks)->required();
  trn_cmd->add_option("--frames", trn.frames, "Frame root (default: <tracks>/../frames)");
  trn_cmd->add_option("--config", trn.config, "TrainConfig JSON");
  trn_cmd->add_option("--out", trn.out, "Model file (.json)")->required();
  trn_cmd->add_option("--log", trn.log, "Loss log CSV (default: beside the model)");
  trn_cmd->add_option("--frame-size", trn.frame_size)->capture_default_str();
  trn_cmd->add_option("--epochs", trn.epochs);
  trn_cmd->add_option("--seed", trn.seed);
  trn_cmd->add_option("--lr", trn.lr);
  trn_cmd->add_option("--lambda", trn.lambda);
  trn_cmd->add_option("--batch-size", trn.batch_size);

  PredictOpts prd;
  auto* prd_cmd = app.add_subcommand("predict", "Predict preview motions of clips");
  PredictOpts evl;
  auto* evl_cmd = app.add_subcommand("eval", "Evaluate a model against the Taylor baselines");
  for (auto [cmd, opts] : {std::pair{prd_cmd, &prd}, std::pair{evl_cmd, &evl}}) {
    cmd->add_option("--clips", opts->clips)->required();
    cmd->add_option("--model", opts->model)->required();
    cmd->add_option("--tracks", opts->tracks)->required();
    cmd->add_option("--frames", opts->frames, "Frame root (default: <tracks>/../frames)");
    cmd->add_option("--out", opts->out)->required();
  }
  evl_cmd->add_option("--labels", evl.labels, "CSV video_id,start_frame,label");
  evl_cmd->add_option("--overlays", evl.overlays, "Clips to render overlays for")->capture_default_str();

  BenchOpts bch;
  auto* bch_cmd = app.add_subcommand("bench", "Time the motion estimators");
  bch_cmd->add_option("--estimators", bch.estimators)->delimiter(',')->capture_default_str();
  bch_cmd->add_option("--length", bch.length, "Frames per sequence")->capture_default_str();
  bch_cmd->add_option("--repeats", bch.repeats)->capture_default_str();
  bch_cmd->add_option("--seed", bch.seed)->capture_default_str();
  bch_cmd->add_option("--out", bch.out, "CSV table");

  PipelineOpts pip;
  auto* pip_cmd = app.add_subcommand("pipeline", "Sample, train and evaluate end to end");
  pip_cmd->add_option("--config", pip.config, "Pipeline config JSON");
  pip_cmd->add_option("--out", pip.out);
  pip_cmd->add_flag("--dry-run", pip.dry_run, "Validate the config and print the plan");
  pip_cmd->add_option("--epochs", pip.epochs);
  pip_cmd->add_option("--seed", pip.seed, "Training seed");
  pip_cmd->add_flag("--quiet", pip.quiet);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (gen->parsed()) return cmd_synth(synth, threads, out);
    if (est_cmd->parsed()) return cmd_estimate(est, threads, out);
    if (cls_cmd->parsed()) return cmd_classify(cls, out);
    if (smp_cmd->parsed()) return cmd_sample(smp, out);
    if (trn_cmd->parsed()) return cmd_train(trn, threads, out);
    if (prd_cmd->parsed()) return cmd_predict(prd, threads, out);
    if (evl_cmd->parsed()) return cmd_eval(evl, threads, out);
    if (bch_cmd->parsed()) return cmd_bench(bch, out);
    if (pip_cmd->parsed()) return cmd_pipeline(pip, threads, out);
  } catch (const QualityGate& e) {
    err << "quality gate: " << e.what() << "\n";
    return kQualityGate;
  } catch (const PipelineError& e) {
    err << "error: " << e.what() << "\n";
    return e.bad_input() ? kBadInput : kInternal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return is_bad_input(e) ? kBadInput : kInternal;
  }
  return kInternal;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace homoflow::cli
