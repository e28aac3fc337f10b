#include "homoflow/motion_classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "homoflow/error.hpp"

namespace homoflow {

namespace {

constexpr std::array<std::string_view, kMotionClassCount> kNames = {
    "up", "down", "left", "right", "zoom_in", "zoom_out", "rotate_left", "rotate_right", "mixed", "static"};

template <typename Pred>
bool all_corners(Pred&& pred) {
  for (std::size_t i = 0; i < 4; ++i)
    if (!pred(i)) return false;
  return true;
}

}  // namespace

std::string_view to_string(MotionClass c) { return kNames[static_cast<std::size_t>(c)]; }

MotionClass motion_class_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == s) return kAllMotionClasses[i];
  throw InvalidInput("unknown motion class '" + std::string(s) + "'");
}

MotionClass mirror_class(MotionClass c) {
  switch (c) {
    case MotionClass::Left: return MotionClass::Right;
    case MotionClass::Right: return MotionClass::Left;
    case MotionClass::RotateLeft: return MotionClass::RotateRight;
    case MotionClass::RotateRight: return MotionClass::RotateLeft;
    default: return c;
  }
}

double motion_magnitude(const FourPointDelta& d) {
  double sum = 0.0;
  for (const auto& v : d.d) sum += v.norm();
  return sum / 4.0;
}

MotionClass classify(const FourPointDelta& d, double sigma, const FrameGeometry& geom) {
  if (motion_magnitude(d) < sigma) return MotionClass::Static;

  // Image coordinates: +x right, +y down.
  if (all_corners([&](auto i) { return d[i].x() > 0 && d[i].x() > std::abs(d[i].y()); })) return MotionClass::Right;
  if (all_corners([&](auto i) { return d[i].x() < 0 && -d[i].x() > std::abs(d[i].y()); })) return MotionClass::Left;
  if (all_corners([&](auto i) { return d[i].y() < 0 && -d[i].y() > std::abs(d[i].x()); })) return MotionClass::Up;
  if (all_corners([&](auto i) { return d[i].y() > 0 && d[i].y() > std::abs(d[i].x()); })) return MotionClass::Down;

  const auto corners = geom.corners();
  const Vec2 c = geom.center();
  std::array<double, 4> radial{}, tangential{};
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 out = (corners[i] - c).normalized();
    // Visually counter-clockwise on a y-down screen.
    const Vec2 ccw(out.y(), -out.x());
    radial[i] = d[i].dot(out);
    tangential[i] = d[i].dot(ccw);
  }
  if (all_corners([&](auto i) { return radial[i] > 0 && radial[i] > std::abs(tangential[i]); }))
    return MotionClass::ZoomOut;
  if (all_corners([&](auto i) { return radial[i] < 0 && -radial[i] > std::abs(tangential[i]); }))
    return MotionClass::ZoomIn;
  if (all_corners([&](auto i) { return tangential[i] > 0 && tangential[i] > std::abs(radial[i]); }))
    return MotionClass::RotateLeft;
  if (all_corners([&](auto i) { return tangential[i] < 0 && -tangential[i] > std::abs(radial[i]); }))
    return MotionClass::RotateRight;
  return MotionClass::Mixed;
}

MotionDistribution distribution(const MotionTrack& track, double sigma, const FrameGeometry& geom) {
  MotionDistribution dist;
  dist.sigma_used = sigma;
  for (const auto& e : track.entries) {
    if (!e) {
      ++dist.missing;
      continue;
    }
    ++dist.counts[static_cast<std::size_t>(classify(*e, sigma, geom))];
    ++dist.total;
  }
  if (dist.total == 0) throw EmptyTrack("track has no present motion entries");
  return dist;
}

std::string MotionDistribution::to_json() const {
  nlohmann::json classes = nlohmann::json::object();
  for (auto c : kAllMotionClasses)
    classes[std::string(homoflow::to_string(c))] = {{"count", count(c)}, {"fraction", fraction(c)}};
  const nlohmann::json j = {{"classes", classes}, {"total", total}, {"missing", missing}, {"sigma", sigma_used}};
  return j.dump(2);
}

std::string MotionDistribution::to_csv() const {
  std::ostringstream os;
  os << "class,count,fraction\n";
  char buf[64];
  for (auto c : kAllMotionClasses) {
    std::snprintf(buf, sizeof(buf), "%.6f", fraction(c));
    os << homoflow::to_string(c) << ',' << count(c) << ',' << buf << '\n';
  }
  return os.str();
}

std::string MotionDistribution::to_svg() const {
  constexpr int kBarWidth = 56, kGap = 14, kPlotHeight = 240, kTop = 30, kLeft = 40;
  const int width = kLeft + static_cast<int>(kMotionClassCount) * (kBarWidth + kGap) + kGap;
  const int height = kTop + kPlotHeight + 60;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"13\">Camera motion distribution (n=" << total
     << ")</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + kPlotHeight << "\" x2=\"" << width - kGap << "\" y2=\""
     << kTop + kPlotHeight << "\" stroke=\"black\"/>\n";
  char buf[32];
  for (std::size_t i = 0; i < kMotionClassCount; ++i) {
    const double f = fraction(kAllMotionClasses[i]);
    const int bar = static_cast<int>(std::lround(f * kPlotHeight));
    const int x = kLeft + kGap + static_cast<int>(i) * (kBarWidth + kGap);
    os << "<rect x=\"" << x << "\" y=\"" << kTop + kPlotHeight - bar << "\" width=\"" << kBarWidth
       << "\" height=\"" << bar << "\" fill=\"#4c72b0\"/>\n";
    std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * f);
    os << "<text x=\"" << x + kBarWidth / 2 << "\" y=\"" << kTop + kPlotHeight - bar - 4
       << "\" text-anchor=\"middle\">" << buf << "</text>\n";
    os << "<text x=\"" << x + kBarWidth / 2 << "\" y=\"" << kTop + kPlotHeight + 16
       << "\" text-anchor=\"middle\">" << homoflow::to_string(kAllMotionClasses[i]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace homoflow
