#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "homoflow/homography.hpp"
#include "homoflow/track.hpp"

namespace homoflow {

enum class MotionClass { Up, Down, Left, Right, ZoomIn, ZoomOut, RotateLeft, RotateRight, Mixed, Static };

inline constexpr std::size_t kMotionClassCount = 10;
inline constexpr std::array<MotionClass, kMotionClassCount> kAllMotionClasses = {
    MotionClass::Up,     MotionClass::Down,       MotionClass::Left,        MotionClass::Right, MotionClass::ZoomIn,
    MotionClass::ZoomOut, MotionClass::RotateLeft, MotionClass::RotateRight, MotionClass::Mixed, MotionClass::Static};

std::string_view to_string(MotionClass c);
// Accepts the snake_case names produced by to_string. Throws InvalidInput.
MotionClass motion_class_from_string(std::string_view s);

// Class under a horizontal mirror of the frame.
MotionClass mirror_class(MotionClass c);

// Mean Euclidean norm of the four corner displacements.
double motion_magnitude(const FourPointDelta& d);

// Static below sigma, then unanimous translation, zoom, and rotation tests
// in that order; Mixed when nothing is unanimous.
MotionClass classify(const FourPointDelta& d, double sigma, const FrameGeometry& geom);

struct MotionDistribution {
  std::array<std::size_t, kMotionClassCount> counts{};
  std::size_t total = 0;
  std::size_t missing = 0;
  double sigma_used = 0.0;

  std::size_t count(MotionClass c) const { return counts[static_cast<std::size_t>(c)]; }
  double fraction(MotionClass c) const {
    return total ? static_cast<double>(count(c)) / static_cast<double>(total) : 0.0;
  }

  // {"classes": {name: {count, fraction}}, "total", "missing", "sigma"}
  std::string to_json() const;
  // Header plus one "class,count,fraction" row per class.
  std::string to_csv() const;
  std::string to_svg() const;
};

// Throws EmptyTrack when the track has no present entries.
MotionDistribution distribution(const MotionTrack& track, double sigma, const FrameGeometry& geom);

}  // namespace homoflow
