#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "homoflow/estimation.hpp"
#include "homoflow/homography.hpp"
#include "homoflow/image.hpp"

namespace homoflow {

enum class GeometricKind { Identity, FlipH, FlipV, Rotate90, Rotate180, Rotate270 };

inline constexpr std::array<GeometricKind, 6> kAllGeometricKinds = {
    GeometricKind::Identity, GeometricKind::FlipH,     GeometricKind::FlipV,
    GeometricKind::Rotate90, GeometricKind::Rotate180, GeometricKind::Rotate270};

std::string_view to_string(GeometricKind k);

// Exact pixel permutations of the frame. Rotations are clockwise on screen.
struct GeometricTransform {
  GeometricKind kind = GeometricKind::Identity;

  // Frame geometry after the transform (width/height swap for 90/270).
  FrameGeometry output_geometry(const FrameGeometry& in) const;
  // Pixel-coordinate map from the input grid to the output grid.
  Homography as_matrix(const FrameGeometry& in) const;
  bool operator==(const GeometricTransform&) const = default;
};

enum class PhotometricKind { Identity, Gain, Bias, Gamma, GaussianNoise };

inline constexpr std::array<PhotometricKind, 5> kAllPhotometricKinds = {
    PhotometricKind::Identity, PhotometricKind::Gain, PhotometricKind::Bias, PhotometricKind::Gamma,
    PhotometricKind::GaussianNoise};

std::string_view to_string(PhotometricKind k);

// Gain in [0.5, 1.5], bias in [-0.2, 0.2], gamma in [0.5, 2.0],
// noise sigma in [0, 0.05]. Output is clamped to [0, 1].
struct PhotometricTransform {
  PhotometricKind kind = PhotometricKind::Identity;
  double value = 0.0;
  std::uint64_t seed = 0;

  static PhotometricTransform identity() { return {}; }
  static PhotometricTransform gain(double a) { return {PhotometricKind::Gain, a, 0}; }
  static PhotometricTransform bias(double b) { return {PhotometricKind::Bias, b, 0}; }
  static PhotometricTransform gamma(double g) { return {PhotometricKind::Gamma, g, 0}; }
  static PhotometricTransform noise(double sigma, std::uint64_t seed) {
    return {PhotometricKind::GaussianNoise, sigma, seed};
  }

  // Throws ParameterOutOfRange.
  void validate() const;
  // frame_index decorrelates the noise between frames of one sequence.
  GrayFrame apply(const GrayFrame& f, std::size_t frame_index = 0) const;
};

GrayFrame apply_geometric(const GrayFrame& f, const GeometricTransform& t);
std::vector<GrayFrame> apply_geometric_sequence(const std::vector<GrayFrame>& frames, const GeometricTransform& t);

// Throws ParameterOutOfRange.
std::vector<GrayFrame> apply_photometric_sequence(const std::vector<GrayFrame>& frames,
                                                  const PhotometricTransform& t);

// Four-point motion seen in the transformed frames: T G T^-1, expressed on the
// transformed geometry.
FourPointDelta conjugate_motion(const FourPointDelta& d, const GeometricTransform& t, const FrameGeometry& geom);

// Same for an arbitrary pixel map `t` from `geom` to `out_geom`.
FourPointDelta conjugate_motion(const FourPointDelta& d, const Homography& t, const FrameGeometry& geom,
                                const FrameGeometry& out_geom);

// Parity path: transform both frames and estimate again.
FourPointDelta reestimate_motion(const GrayFrame& a, const GrayFrame& b, const GeometricTransform& t,
                                 const EstimatorConfig& cfg);

struct Augmentation {
  GeometricTransform geometric;
  PhotometricTransform photometric;
};

// Uniform over kinds, parameters uniform in their ranges; deterministic per seed.
Augmentation sample_augmentation(std::uint64_t seed, bool enable_geometric, bool enable_photometric);
inline Augmentation sample_augmentation(std::uint64_t seed, bool enable_photometric) {
  return sample_augmentation(seed, true, enable_photometric);
}

}  // namespace homoflow
