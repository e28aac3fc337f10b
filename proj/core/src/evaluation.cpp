#include "homoflow/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "homoflow/error.hpp"
#include "homoflow/estimation.hpp"
#include "homoflow/manifest.hpp"
#include "homoflow/parallel.hpp"
#include "homoflow/synthetic.hpp"

namespace homoflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<MotionClass, 4> kDirections = {MotionClass::Up, MotionClass::Down, MotionClass::Left,
                                                    MotionClass::Right};

bool is_direction(MotionClass c) {
  return std::find(kDirections.begin(), kDirections.end(), c) != kDirections.end();
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  double sum = 0.0;
  for (double x : v) sum += x;
  r.mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(sq / static_cast<double>(v.size()));
  return r;
}

AgreementTable tabulate(const std::vector<Vec2>& disp, const std::vector<MotionClass>& labels, bool negate) {
  AgreementTable t;
  t.negated = negate;
  for (MotionClass c : kDirections) {
    LabelAgreement row;
    row.label = c;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != c) continue;
      const Vec2 d = negate ? Vec2(-disp[i]) : disp[i];
      ++row.count;
      xs.push_back(d.x());
      ys.push_back(d.y());
      const auto dir = dominant_direction(d);
      if (!dir) ++row.abstain;
      else if (*dir == c) ++row.agree;
    }
    if (row.count == 0) continue;
    row.agreement = static_cast<double>(row.agree) / static_cast<double>(row.count);
    row.mean = Vec2(mean_std(xs).mean, mean_std(ys).mean);
    row.x = quartiles(xs);
    row.y = quartiles(ys);
    t.count += row.count;
    t.agree += row.agree;
    t.abstain += row.abstain;
    t.rows.push_back(row);
  }
  for (MotionClass c : labels)
    if (!is_direction(c)) ++t.ignored;
  return t;
}

json quartiles_json(const Quartiles& q) { return {{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}}; }

json agreement_json(const AgreementTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"label", std::string(to_string(r.label))},
                    {"count", r.count},
                    {"agree", r.agree},
                    {"abstain", r.abstain},
                    {"agreement", r.agreement},
                    {"mean", {r.mean.x(), r.mean.y()}},
                    {"x", quartiles_json(r.x)},
                    {"y", quartiles_json(r.y)}});
  return {{"negated", t.negated}, {"count", t.count},     {"agree", t.agree},  {"abstain", t.abstain},
          {"ignored", t.ignored}, {"agreement", t.agreement()}, {"labels", rows}};
}

}  // namespace

double sample_error(const MotionSequence& pred, const MotionSequence& target) {
  if (pred.size() != target.size() || pred.empty()) throw DimensionMismatch("prediction/target step mismatch");
  double sum = 0.0;
  for (std::size_t s = 0; s < pred.size(); ++s)
    for (std::size_t k = 0; k < 4; ++k) sum += (pred[s].d[k] - target[s].d[k]).norm();
  return sum / static_cast<double>(4 * pred.size());
}

MeanStd mpd(const std::vector<MotionSequence>& preds, const std::vector<MotionSequence>& targets) {
  if (preds.empty()) throw EmptySet("mpd of an empty set");
  if (preds.size() != targets.size()) throw DimensionMismatch("prediction/target count mismatch");
  std::vector<double> errors(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) errors[i] = sample_error(preds[i], targets[i]);
  return mean_std(errors);
}

Vec2 center_displacement(const FourPointDelta& d, const FrameGeometry& geom) {
  const Vec2 c = geom.center();
  const Vec2 moved = project_point(matrix_from_four_point(d, geom), c);
  const Vec2 h = geom.half_extent();
  return {(moved.x() - c.x()) / h.x(), (moved.y() - c.y()) / h.y()};
}

std::optional<MotionClass> dominant_direction(const Vec2& v) {
  if (std::max(std::abs(v.x()), std::abs(v.y())) < kAgreementDeadZone) return std::nullopt;
  if (std::abs(v.x()) > std::abs(v.y())) return v.x() > 0 ? MotionClass::Right : MotionClass::Left;
  if (std::abs(v.y()) > std::abs(v.x())) return v.y() > 0 ? MotionClass::Down : MotionClass::Up;
  return std::nullopt;
}

Quartiles quartiles(std::vector<double> v) {
  if (v.empty()) throw EmptySet("quartiles of an empty set");
  std::sort(v.begin(), v.end());
  const auto at = [&v](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

const LabelAgreement* AgreementTable::row(MotionClass c) const {
  for (const auto& r : rows)
    if (r.label == c) return &r;
  return nullptr;
}

AgreementTable label_agreement(const std::vector<Vec2>& displacements, const std::vector<MotionClass>& labels,
                               bool allow_negation) {
  if (displacements.size() != labels.size()) throw LabelMismatch("labels do not cover the predictions");
  AgreementTable plain = tabulate(displacements, labels, false);
  if (!allow_negation) return plain;
  AgreementTable flipped = tabulate(displacements, labels, true);
  return flipped.agree > plain.agree ? flipped : plain;
}

double overlay_misalignment(const GrayFrame& past, const GrayFrame& current, const FourPointDelta& d) {
  if (past.width != current.width || past.height != current.height)
    throw DimensionMismatch("overlay frames differ in size");
  const Homography inv = invert(matrix_from_four_point(d, past.geometry()));
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < current.height; ++y)
    for (int x = 0; x < current.width; ++x) {
      const Vec2 s = project_point(inv, Vec2(x, y));
      if (s.x() < 0 || s.y() < 0 || s.x() > past.width - 1 || s.y() > past.height - 1) continue;
      sum += std::abs(past.sample(s.x(), s.y()) - current.at(x, y));
      ++n;
    }
  if (n == 0) throw EmptySet("no overlap between warped and current frame");
  return sum / static_cast<double>(n);
}

RgbImage warp_overlay(const GrayFrame& past, const GrayFrame& current, const FourPointDelta& d) {
  if (past.width != current.width || past.height != current.height)
    throw DimensionMismatch("overlay frames differ in size");
  const Homography inv = invert(matrix_from_four_point(d, past.geometry()));
  const GrayFrame warped = warp_frame(past, inv, past.width, past.height, 0.0);
  RgbImage out(past.width, past.height);
  for (int y = 0; y < past.height; ++y)
    for (int x = 0; x < past.width; ++x) {
      auto* p = out.px(x, y);
      p[0] = p[1] = to_byte(warped.at(x, y));
      p[2] = to_byte(current.at(x, y));
    }
  return out;
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<NamedEstimator>& estimators,
                                        const std::vector<GrayFrame>& sequence, int repeats) {
  if (repeats < 2) throw ParameterOutOfRange("benchmark needs at least 2 repeats");
  std::vector<BenchmarkRow> rows;
  for (const auto& e : estimators) {
    e.run(sequence);
    std::vector<double> times;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      e.run(sequence);
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    const MeanStd s = mean_std(times);
    rows.push_back({e.name, s.mean, s.std, 1.0});
  }
  double slowest = 0.0;
  for (const auto& r : rows) slowest = std::max(slowest, r.mean_s);
  for (auto& r : rows) r.speedup = r.mean_s > 0 ? slowest / r.mean_s : 1.0;
  return rows;
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<NamedEstimator>& estimators, int sequence_length,
                                        int repeats, std::uint64_t seed) {
  if (sequence_length < 2) throw ParameterOutOfRange("benchmark sequence needs at least 2 frames");
  const Scene scene = generate_scene(seed, 512);
  TrajectoryParams params;
  params.canvas_size = 512;
  params.velocity = Vec2(1.5, 0.5);
  const Trajectory traj = generate_trajectory(TrajectoryKind::RandomProjective, sequence_length - 1, params, seed);
  SequenceRenderer renderer(scene, traj, {});
  std::vector<GrayFrame> frames;
  for (std::size_t t = 0; t < renderer.frame_count(); ++t) frames.push_back(renderer.frame(t));
  return run_benchmark(estimators, frames, repeats);
}

std::string benchmark_table(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  out << "method,time_mean_s,time_std_s,speedup\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.3f\n", r.method.c_str(), r.mean_s, r.std_s, r.speedup);
    out << buf;
  }
  return out.str();
}

std::vector<NamedEstimator> default_estimators() {
  std::vector<NamedEstimator> out;
  out.push_back({"ransac", [](const std::vector<GrayFrame>& seq) {
                   EstimatorConfig cfg;
                   for (std::size_t i = 0; i + 1 < seq.size(); ++i) estimate_motion(seq[i], seq[i + 1], cfg);
                 }});
  out.push_back({"dlt-all", [](const std::vector<GrayFrame>& seq) {
                   EstimatorConfig cfg;
                   for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
                     const auto pts = detect_corners(seq[i], cfg.max_corners, cfg.min_distance);
                     dlt_homography(match_patches(seq[i], seq[i + 1], pts, cfg.window, cfg.search_radius));
                   }
                 }});
  return out;
}

const MethodSummary& EvalReport::method(const std::string& name) const {
  for (const auto& m : methods)
    if (m.method == name) return m;
  throw InvalidInput("no method '" + name + "' in report");
}

std::vector<MotionSequence> baseline_predictions(const ClipDataset& data, int order) {
  if (order != 1 && order != 2) throw ParameterOutOfRange("Taylor order must be 1 or 2");
  std::vector<MotionSequence> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto recall = data.recall_motions(i);
    out.push_back(order == 1 ? taylor_o1(recall, data.spec().m) : taylor_o2(recall, data.spec().m));
  }
  return out;
}

EvalReport evaluate(const ClipDataset& data, const MethodPredictions& predictions,
                    const std::vector<std::optional<MotionClass>>& labels, int threads) {
  if (data.empty()) throw EmptySet("no clips to evaluate");
  if (!labels.empty() && labels.size() != data.size()) throw LabelMismatch("labels do not cover the clips");
  for (const auto& [name, preds] : predictions)
    if (preds.size() != data.size()) throw DimensionMismatch("method '" + name + "' has the wrong clip count");

  EvalReport report;
  report.records.resize(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const Clip& clip = data.clips()[i];
    ClipRecord& rec = report.records[i];
    rec.video_id = clip.video_id;
    rec.start = clip.start;
    if (!labels.empty()) rec.label = labels[i];
    const auto target = data.targets(i);
    const FrameGeometry geom = data.track(clip.video_id).geometry;
    for (const auto& [name, preds] : predictions) {
      rec.error[name] = sample_error(preds[i], target);
      rec.displacement[name] = center_displacement(preds[i].front(), geom);
    }
  });

  for (const auto& [name, preds] : predictions) {
    std::vector<double> errors;
    std::vector<Vec2> disp;
    std::vector<MotionClass> lab;
    for (const auto& rec : report.records) {
      errors.push_back(rec.error.at(name));
      if (rec.label) {
        disp.push_back(rec.displacement.at(name));
        lab.push_back(*rec.label);
      }
    }
    report.methods.push_back({name, mean_std(errors), errors.size()});
    if (!lab.empty()) report.agreement[name] = label_agreement(disp, lab);
  }
  return report;
}

std::string report_to_json(const EvalReport& report) {
  json j;
  j["config"] = json::parse(report.config_json);
  j["methods"] = json::array();
  for (const auto& m : report.methods)
    j["methods"].push_back(
        {{"method", m.method}, {"mpd_mean", m.mpd.mean}, {"mpd_std", m.mpd.std}, {"count", m.count}});
  j["agreement"] = json::object();
  for (const auto& [name, t] : report.agreement) j["agreement"][name] = agreement_json(t);
  j["records"] = json::array();
  for (const auto& r : report.records) {
    json rec = {{"video_id", r.video_id}, {"start", r.start}};
    rec["label"] = r.label ? json(std::string(to_string(*r.label))) : json(nullptr);
    for (const auto& [name, e] : r.error) rec["error"][name] = e;
    for (const auto& [name, d] : r.displacement) rec["displacement"][name] = {d.x(), d.y()};
    j["records"].push_back(rec);
  }
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "video_id,start,label,method,error,center_x,center_y\n";
  char buf[128];
  for (const auto& r : report.records)
    for (const auto& [name, e] : r.error) {
      const Vec2 d = r.displacement.at(name);
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", e, d.x(), d.y());
      out << r.video_id << ',' << r.start << ',' << (r.label ? to_string(*r.label) : "") << ',' << name << buf;
    }
  return out.str();
}

std::string report_hash(const EvalReport& report) { return sha256_hex(report_to_json(report)); }

std::string displacement_svg(const EvalReport& report, const std::string& method) {
  constexpr int size = 480, pad = 40;
  const auto px = [](double v) { return pad + (v + 1.0) * 0.5 * (size - 2 * pad); };
  const std::map<MotionClass, const char*> colors = {{MotionClass::Up, "#1f77b4"},
                                                     {MotionClass::Down, "#ff7f0e"},
                                                     {MotionClass::Left, "#2ca02c"},
                                                     {MotionClass::Right, "#d62728"}};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << pad << "\" y1=\"" << size / 2 << "\" x2=\"" << size - pad << "\" y2=\"" << size / 2
      << "\" stroke=\"#999\"/>\n"
      << "<line x1=\"" << size / 2 << "\" y1=\"" << pad << "\" x2=\"" << size / 2 << "\" y2=\"" << size - pad
      << "\" stroke=\"#999\"/>\n"
      << "<text x=\"" << pad << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">centre displacement: "
      << method << "</text>\n";
  char buf[160];
  for (const auto& r : report.records) {
    if (!r.label || !colors.count(*r.label)) continue;
    const Vec2 d = r.displacement.at(method);
    const double x = std::clamp(d.x(), -1.0, 1.0), y = std::clamp(d.y(), -1.0, 1.0);
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\" fill-opacity=\"0.6\"/>\n",
                  px(x), px(y), colors.at(*r.label));
    out << buf;
  }
  int row = 0;
  for (const auto& [label, color] : colors) {
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"10\" height=\"10\" fill=\"%s\"/><text x=\"%d\" y=\"%d\" "
                  "font-family=\"sans-serif\" font-size=\"12\">%s</text>\n",
                  size - 100, pad + 16 * row, color, size - 84, pad + 16 * row + 10,
                  std::string(to_string(label)).c_str());
    out << buf;
    ++row;
  }
  out << "</svg>\n";
  return out.str();
}

void write_report(const fs::path& dir, const EvalReport& report) {
  fs::create_directories(dir);
  write_file_atomic(dir / "report.json", report_to_json(report));
  write_file_atomic(dir / "report.csv", report_to_csv(report));
  for (const auto& [name, table] : report.agreement)
    write_file_atomic(dir / ("centers_" + name + ".svg"), displacement_svg(report, name));
}

LabelTable read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read labels " + path.string());
  LabelTable table;
  std::string line;
  std::getline(in, line);
  if (line.rfind("video_id", 0) != 0) throw InvalidInput("labels file lacks the video_id,start_frame,label header");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.find(',', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
    try {
      const int start = std::stoi(line.substr(a + 1, b - a - 1));
      table[{line.substr(0, a), start}] = motion_class_from_string(line.substr(b + 1));
    } catch (const std::logic_error&) {
      throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": bad start_frame");
    }
  }
  return table;
}

void write_labels(const fs::path& path, const LabelTable& labels) {
  std::ostringstream out;
  out << "video_id,start_frame,label\n";
  for (const auto& [key, label] : labels) out << key.first << ',' << key.second << ',' << to_string(label) << '\n';
  write_file_atomic(path, out.str());
}

std::vector<std::optional<MotionClass>> clip_labels(const ClipDataset& data, const LabelTable& labels) {
  std::vector<std::optional<MotionClass>> out;
  out.reserve(data.size());
  for (const auto& clip : data.clips()) {
    const auto it = labels.find({clip.video_id, clip.recall_end()});
    out.push_back(it == labels.end() ? std::nullopt : std::optional<MotionClass>(it->second));
  }
  return out;
}

}  // namespace homoflow
