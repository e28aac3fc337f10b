#include "homoflow/synthetic.hpp"

#include <algorithm>
#include <array>
#include <span>
#include <cmath>

#include "homoflow/error.hpp"
#include "homoflow/random.hpp"
#include "homoflow/sampling.hpp"

namespace homoflow {

namespace {

constexpr double kCanvasMargin = 2.0;
constexpr double kCueOpacity = 0.9;

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

void add_value_noise(std::vector<double>& acc, int size, int cell, double amplitude, Rng& rng) {
  const int lattice = size / cell + 2;
  std::vector<double> values(static_cast<std::size_t>(lattice) * lattice);
  for (auto& v : values) v = rng.uniform(-1.0, 1.0);
  for (int y = 0; y < size; ++y) {
    const int gy = y / cell;
    const double fy = smooth(static_cast<double>(y % cell) / cell);
    for (int x = 0; x < size; ++x) {
      const int gx = x / cell;
      const double fx = smooth(static_cast<double>(x % cell) / cell);
      const auto v = [&](int ix, int iy) { return values[static_cast<std::size_t>(iy) * lattice + ix]; };
      const double top = v(gx, gy) * (1 - fx) + v(gx + 1, gy) * fx;
      const double bottom = v(gx, gy + 1) * (1 - fx) + v(gx + 1, gy + 1) * fx;
      acc[static_cast<std::size_t>(y) * size + x] += amplitude * (top * (1 - fy) + bottom * fy);
    }
  }
}

bool viewport_inside(const Homography& viewport_to_canvas, const FrameGeometry& viewport, int canvas) {
  for (const auto& c : viewport.corners()) {
    const Eigen::Vector3d h = viewport_to_canvas.matrix() * Eigen::Vector3d(c.x(), c.y(), 1.0);
    if (h.z() <= kProjectionEps) return false;
    const double x = h.x() / h.z(), y = h.y() / h.z();
    if (x < kCanvasMargin || y < kCanvasMargin || x > canvas - 1 - kCanvasMargin || y > canvas - 1 - kCanvasMargin)
      return false;
  }
  return true;
}

Homography initial_viewport(const FrameGeometry& viewport, int canvas) {
  return Homography::translation((canvas - viewport.width) / 2.0, (canvas - viewport.height) / 2.0);
}

std::vector<Homography> chain_viewports(const std::vector<Homography>& steps, const FrameGeometry& viewport,
                                        int canvas) {
  std::vector<Homography> maps{initial_viewport(viewport, canvas)};
  for (const auto& g : steps) maps.push_back(compose(maps.back(), invert(g)));
  return maps;
}

Vec2 direction_vector(MotionClass c) {
  switch (c) {
    case MotionClass::Right: return {1, 0};
    case MotionClass::Left: return {-1, 0};
    case MotionClass::Up: return {0, -1};
    case MotionClass::Down: return {0, 1};
    default: return {0, 0};
  }
}

Vec2 cue_anchor(MotionClass c, const FrameGeometry& v) {
  const double w = v.width - 1.0, h = v.height - 1.0;
  switch (c) {
    case MotionClass::Right: return {0.8 * w, 0.5 * h};
    case MotionClass::Left: return {0.2 * w, 0.5 * h};
    case MotionClass::Up: return {0.5 * w, 0.2 * h};
    case MotionClass::Down: return {0.5 * w, 0.8 * h};
    default: return v.center();
  }
}

Trajectory cue_conditioned(int length, const TrajectoryParams& p, Rng& rng) {
  Trajectory tr;
  tr.kind = TrajectoryKind::CueConditioned;
  const std::array<MotionClass, 4> dirs = {MotionClass::Right, MotionClass::Left, MotionClass::Up, MotionClass::Down};
  const std::size_t ndirs = p.cue_directions == 2 ? 2 : 4;
  // Viewport origin in canvas pixels; content motion v moves it by -v.
  Vec2 origin((p.canvas_size - p.viewport.width) / 2.0, (p.canvas_size - p.viewport.height) / 2.0);
  const Vec2 lo(kCanvasMargin + 1, kCanvasMargin + 1);
  const Vec2 hi(p.canvas_size - p.viewport.width - kCanvasMargin - 2,
                p.canvas_size - p.viewport.height - kCanvasMargin - 2);
  const double jitter = 0.03 * std::min(p.viewport.width, p.viewport.height);

  std::vector<MotionClass> plan;
  std::vector<Vec2> offsets;
  while (static_cast<int>(plan.size()) < length) {
    int dwell = p.min_dwell + static_cast<int>(rng.index(static_cast<std::uint64_t>(p.max_dwell - p.min_dwell + 1)));
    dwell = std::max(p.dwell_quantum, dwell - dwell % p.dwell_quantum);
    const bool still = rng.uniform() < p.static_probability;
    std::vector<MotionClass> feasible;
    for (std::size_t i = 0; i < ndirs; ++i) {
      const Vec2 end = origin - direction_vector(dirs[i]) * p.cue_speed * dwell;
      if (end.x() >= lo.x() && end.y() >= lo.y() && end.x() <= hi.x() && end.y() <= hi.y()) feasible.push_back(dirs[i]);
    }
    const auto pick = rng.index(feasible.empty() ? 1 : feasible.size());
    const Vec2 offset(rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter));
    const MotionClass dir = !still && !feasible.empty() ? feasible[pick] : MotionClass::Static;
    for (int k = 0; k < dwell && static_cast<int>(plan.size()) < length; ++k) {
      plan.push_back(dir);
      offsets.push_back(offset);
      origin -= direction_vector(dir) * p.cue_speed;
    }
  }
  for (int t = 0; t < length; ++t) {
    const Vec2 v = direction_vector(plan[t]) * p.cue_speed;
    tr.steps.push_back(Homography::translation(v.x(), v.y()));
    const int cmd = t + p.cue_lead;
    if (cmd < length && plan[cmd] != MotionClass::Static)
      tr.cues.emplace_back(cue_anchor(plan[cmd], p.viewport) + offsets[cmd]);
    else
      tr.cues.emplace_back(std::nullopt);
  }
  return tr;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, int size) {
  if (size < 512) throw ParameterOutOfRange("scene size must be >= 512");
  Rng rng(seed);
  std::vector<double> acc(static_cast<std::size_t>(size) * size, 0.0);
  const std::array<std::pair<int, double>, 6> octaves = {
      {{96, 1.0}, {48, 0.8}, {24, 0.7}, {12, 0.6}, {6, 0.5}, {3, 0.35}}};
  for (const auto& [cell, amp] : octaves) add_value_noise(acc, size, cell, amp, rng);

  const int blobs = size * size / 2500;
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.uniform(0, size), cy = rng.uniform(0, size);
    const double r = rng.uniform(2.0, 10.0);
    const double amp = rng.uniform(-1.2, 1.2);
    const int x0 = std::max(0, static_cast<int>(cx - 3 * r)), x1 = std::min(size - 1, static_cast<int>(cx + 3 * r));
    const int y0 = std::max(0, static_cast<int>(cy - 3 * r)), y1 = std::min(size - 1, static_cast<int>(cy + 3 * r));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        acc[static_cast<std::size_t>(y) * size + x] += amp * std::exp(-d2 / (2 * r * r));
      }
  }

  const auto [mn, mx] = std::minmax_element(acc.begin(), acc.end());
  const double lo = *mn, range = std::max(*mx - *mn, 1e-12);
  Scene scene{GrayFrame(size, size), seed};
  for (std::size_t i = 0; i < acc.size(); ++i)
    scene.canvas.pixels[i] = static_cast<float>(0.05 + 0.9 * (acc[i] - lo) / range);
  return scene;
}

std::string_view to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::ConstantVelocity: return "constant";
    case TrajectoryKind::LinearAcceleration: return "accel";
    case TrajectoryKind::PiecewiseConstantWithSwitches: return "switch";
    case TrajectoryKind::CueConditioned: return "cue";
    case TrajectoryKind::RandomProjective: return "projective";
  }
  return "?";
}

TrajectoryKind trajectory_kind_from_string(std::string_view s) {
  for (auto k : {TrajectoryKind::ConstantVelocity, TrajectoryKind::LinearAcceleration,
                 TrajectoryKind::PiecewiseConstantWithSwitches, TrajectoryKind::CueConditioned,
                 TrajectoryKind::RandomProjective})
    if (to_string(k) == s) return k;
  throw InvalidInput("unknown trajectory kind '" + std::string(s) + "'");
}

MotionClass cue_direction(const Vec2& cue, const FrameGeometry& viewport) {
  const Vec2 off = cue - viewport.center();
  if (std::abs(off.x()) >= std::abs(off.y())) return off.x() > 0 ? MotionClass::Right : MotionClass::Left;
  return off.y() > 0 ? MotionClass::Down : MotionClass::Up;
}

Trajectory generate_trajectory(TrajectoryKind kind, int length, const TrajectoryParams& p, std::uint64_t seed) {
  if (length < 1) throw ParameterOutOfRange("trajectory length must be >= 1");
  if (p.canvas_size < 3 * std::max(p.viewport.width, p.viewport.height))
    throw ParameterOutOfRange("canvas must be at least 3x the viewport");
  Rng rng(seed);
  Trajectory tr;
  switch (kind) {
    case TrajectoryKind::ConstantVelocity:
      for (int t = 0; t < length; ++t) tr.steps.push_back(Homography::translation(p.velocity.x(), p.velocity.y()));
      break;
    case TrajectoryKind::LinearAcceleration:
      for (int t = 0; t < length; ++t) {
        const Vec2 v = p.velocity + p.acceleration * t;
        tr.steps.push_back(Homography::translation(v.x(), v.y()));
      }
      break;
    case TrajectoryKind::PiecewiseConstantWithSwitches: {
      if (p.switches.empty()) throw ParameterOutOfRange("switch schedule is empty");
      std::size_t seg = 0;
      Vec2 v = p.velocity;
      for (int t = 0; t < length; ++t) {
        while (seg < p.switches.size() && p.switches[seg].first <= t) v = p.switches[seg++].second;
        tr.steps.push_back(Homography::translation(v.x(), v.y()));
      }
      break;
    }
    case TrajectoryKind::CueConditioned:
      if (p.min_dwell < 1 || p.max_dwell < p.min_dwell || p.cue_lead < 0 || p.dwell_quantum < 1)
        throw ParameterOutOfRange("invalid dwell range");
      tr = cue_conditioned(length, p, rng);
      break;
    case TrajectoryKind::RandomProjective:
      for (int t = 0; t < length; ++t) {
        FourPointDelta d = FourPointDelta::uniform(p.velocity);
        for (auto& c : d.d) c += Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1)) * p.projective_jitter;
        tr.steps.push_back(matrix_from_four_point(d, p.viewport));
      }
      break;
  }
  tr.kind = kind;
  tr.viewport = p.viewport;
  tr.canvas_size = p.canvas_size;
  const auto maps = chain_viewports(tr.steps, p.viewport, p.canvas_size);
  for (const auto& m : maps)
    if (!viewport_inside(m, p.viewport, p.canvas_size)) throw ViewportEscape("trajectory leaves the canvas");
  return tr;
}

SequenceRenderer::SequenceRenderer(const Scene& scene, const Trajectory& trajectory, RenderOptions options)
    : scene_(scene), trajectory_(trajectory), options_(std::move(options)) {
  if (trajectory.canvas_size > scene.canvas.width || trajectory.canvas_size > scene.canvas.height)
    throw ParameterOutOfRange("scene is smaller than the trajectory canvas");
  if (options_.dn < 1) throw ParameterOutOfRange("dn must be >= 1");
  viewport_maps_ = chain_viewports(trajectory.steps, trajectory.viewport, trajectory.canvas_size);
}

GrayFrame SequenceRenderer::frame(std::size_t t) const {
  const FrameGeometry& v = trajectory_.viewport;
  GrayFrame f = warp_frame(scene_.canvas, viewport_maps_.at(t), v.width, v.height);

  if (options_.object_area > 0.0) {
    const int side = std::max(4, static_cast<int>(std::lround(std::sqrt(options_.object_area * v.width * v.height))));
    // Bounce inside the frame.
    auto fold = [](double x, double range) {
      if (range <= 0) return 0.0;
      const double period = 2 * range;
      double m = std::fmod(x, period);
      if (m < 0) m += period;
      return m <= range ? m : period - m;
    };
    const double ox = fold(0.2 * v.width + options_.object_velocity.x() * static_cast<double>(t), v.width - side);
    const double oy = fold(0.25 * v.height + options_.object_velocity.y() * static_cast<double>(t), v.height - side);
    const int x0 = static_cast<int>(std::lround(ox)), y0 = static_cast<int>(std::lround(oy));
    for (int y = 0; y < side && y0 + y < v.height; ++y)
      for (int x = 0; x < side && x0 + x < v.width; ++x)
        f.at(x0 + x, y0 + y) = scene_.canvas.at(16 + x, 16 + y);
  }

  if (!trajectory_.cues.empty() && t < trajectory_.cues.size() && trajectory_.cues[t]) {
    // Bright disc with a soft rim: visible after downsampling, yet weak in the
    // corner response so it does not crowd out the texture features.
    const Vec2 c = *trajectory_.cues[t];
    const double radius = std::max(3.0, std::min(v.width, v.height) / 12.0);
    const double rim = 0.4 * radius;
    const int reach = static_cast<int>(std::ceil(radius + rim));
    const int cx = static_cast<int>(std::lround(c.x())), cy = static_cast<int>(std::lround(c.y()));
    for (int y = cy - reach; y <= cy + reach; ++y)
      for (int x = cx - reach; x <= cx + reach; ++x) {
        if (x < 0 || y < 0 || x >= v.width || y >= v.height) continue;
        const double r = std::hypot(x - c.x(), y - c.y());
        const double alpha = kCueOpacity * std::clamp((radius + rim - r) / rim, 0.0, 1.0);
        f.at(x, y) = static_cast<float>((1.0 - alpha) * f.at(x, y) + alpha);
      }
  }

  if (options_.photometric_noise > 0.0) {
    Rng rng(derive_seed(options_.noise_seed, t));
    for (auto& p : f.pixels)
      p = static_cast<float>(std::clamp(p + options_.photometric_noise * rng.normal(), 0.0, 1.0));
  }
  return f;
}

MotionTrack SequenceRenderer::truth() const {
  MotionTrack track;
  track.video_id = options_.video_id;
  track.dn = options_.dn;
  track.fps = options_.fps;
  track.geometry = trajectory_.viewport;
  const std::size_t frames = frame_count();
  const auto dn = static_cast<std::size_t>(options_.dn);
  for (std::size_t n = 0; n + dn < frames; ++n) {
    Homography g;
    for (std::size_t k = 0; k < dn; ++k) g = compose(trajectory_.steps[n + k], g);
    track.entries.emplace_back(four_point_from_matrix(g, trajectory_.viewport));
  }
  return track;
}

RenderedSequence render_sequence(const Scene& scene, const Trajectory& trajectory, const RenderOptions& options) {
  SequenceRenderer renderer(scene, trajectory, options);
  RenderedSequence out;
  out.frames.reserve(renderer.frame_count());
  for (std::size_t t = 0; t < renderer.frame_count(); ++t) out.frames.push_back(renderer.frame(t));
  out.truth = renderer.truth();
  if (out.truth.entries.empty()) throw EmptyTrack("sequence shorter than dn");
  out.sigma = options.sigma ? *options.sigma : compute_sigma(std::span<const MotionTrack>(&out.truth, 1));
  for (const auto& e : out.truth.entries) out.labels.push_back(classify(*e, out.sigma, trajectory.viewport));
  return out;
}

std::pair<GrayFrame, GrayFrame> render_pair(const Scene& scene, const Homography& g, const FrameGeometry& geom,
                                            const RenderOptions& options) {
  Trajectory tr;
  tr.steps = {g};
  tr.viewport = geom;
  tr.canvas_size = scene.canvas.width;
  SequenceRenderer r(scene, tr, options);
  return {r.frame(0), r.frame(1)};
}

Homography random_homography(std::uint64_t seed, const FrameGeometry& geom, double max_corner) {
  Rng rng(seed);
  auto disc = [&rng](double radius) {
    const double r = radius * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    return Vec2(r * std::cos(a), r * std::sin(a));
  };
  const Vec2 shift = disc(0.6 * max_corner);
  FourPointDelta d;
  for (auto& c : d.d) c = shift + disc(0.4 * max_corner);
  return matrix_from_four_point(d, geom);
}

}  // namespace homoflow
