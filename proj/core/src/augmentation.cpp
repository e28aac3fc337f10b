#include "homoflow/augmentation.hpp"

#include <algorithm>
#include <cmath>

#include "homoflow/error.hpp"
#include "homoflow/random.hpp"

namespace homoflow {

std::string_view to_string(GeometricKind k) {
  switch (k) {
    case GeometricKind::Identity: return "identity";
    case GeometricKind::FlipH: return "flip_h";
    case GeometricKind::FlipV: return "flip_v";
    case GeometricKind::Rotate90: return "rotate90";
    case GeometricKind::Rotate180: return "rotate180";
    case GeometricKind::Rotate270: return "rotate270";
  }
  return "?";
}

std::string_view to_string(PhotometricKind k) {
  switch (k) {
    case PhotometricKind::Identity: return "identity";
    case PhotometricKind::Gain: return "gain";
    case PhotometricKind::Bias: return "bias";
    case PhotometricKind::Gamma: return "gamma";
    case PhotometricKind::GaussianNoise: return "gaussian_noise";
  }
  return "?";
}

FrameGeometry GeometricTransform::output_geometry(const FrameGeometry& in) const {
  if (kind == GeometricKind::Rotate90 || kind == GeometricKind::Rotate270) return {in.height, in.width};
  return in;
}

Homography GeometricTransform::as_matrix(const FrameGeometry& in) const {
  const double w1 = in.width - 1.0;
  const double h1 = in.height - 1.0;
  Mat3 m;
  switch (kind) {
    case GeometricKind::Identity: m << 1, 0, 0, 0, 1, 0, 0, 0, 1; break;
    case GeometricKind::FlipH: m << -1, 0, w1, 0, 1, 0, 0, 0, 1; break;
    case GeometricKind::FlipV: m << 1, 0, 0, 0, -1, h1, 0, 0, 1; break;
    // (x, y) -> (H-1-y, x)
    case GeometricKind::Rotate90: m << 0, -1, h1, 1, 0, 0, 0, 0, 1; break;
    case GeometricKind::Rotate180: m << -1, 0, w1, 0, -1, h1, 0, 0, 1; break;
    // (x, y) -> (y, W-1-x)
    case GeometricKind::Rotate270: m << 0, 1, 0, -1, 0, w1, 0, 0, 1; break;
  }
  return Homography(m);
}

GrayFrame apply_geometric(const GrayFrame& f, const GeometricTransform& t) {
  if (t.kind == GeometricKind::Identity) return f;
  const FrameGeometry in = f.geometry();
  const FrameGeometry out_geom = t.output_geometry(in);
  const Mat3& m = t.as_matrix(in).matrix();
  GrayFrame out(out_geom.width, out_geom.height);
  // Entries of m are exact small integers, so the permutation is exact.
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const int ox = static_cast<int>(m(0, 0) * x + m(0, 1) * y + m(0, 2));
      const int oy = static_cast<int>(m(1, 0) * x + m(1, 1) * y + m(1, 2));
      out.at(ox, oy) = f.at(x, y);
    }
  return out;
}

std::vector<GrayFrame> apply_geometric_sequence(const std::vector<GrayFrame>& frames, const GeometricTransform& t) {
  std::vector<GrayFrame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    if (!frames.empty() && (f.width != frames.front().width || f.height != frames.front().height))
      throw DimensionMismatch("sequence frames differ in size");
    out.push_back(apply_geometric(f, t));
  }
  return out;
}

void PhotometricTransform::validate() const {
  auto in_range = [this](double lo, double hi) {
    if (!(value >= lo && value <= hi)) throw ParameterOutOfRange("photometric parameter out of range");
  };
  switch (kind) {
    case PhotometricKind::Identity: break;
    case PhotometricKind::Gain: in_range(0.5, 1.5); break;
    case PhotometricKind::Bias: in_range(-0.2, 0.2); break;
    case PhotometricKind::Gamma: in_range(0.5, 2.0); break;
    case PhotometricKind::GaussianNoise: in_range(0.0, 0.05); break;
  }
}

GrayFrame PhotometricTransform::apply(const GrayFrame& f, std::size_t frame_index) const {
  if (kind == PhotometricKind::Identity) return f;
  GrayFrame out = f;
  auto clamp01 = [](double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); };
  switch (kind) {
    case PhotometricKind::Gain:
      for (auto& v : out.pixels) v = clamp01(value * v);
      break;
    case PhotometricKind::Bias:
      for (auto& v : out.pixels) v = clamp01(v + value);
      break;
    case PhotometricKind::Gamma:
      for (auto& v : out.pixels) v = clamp01(std::pow(std::max(0.0f, v), value));
      break;
    case PhotometricKind::GaussianNoise: {
      Rng rng(derive_seed(seed, frame_index));
      for (auto& v : out.pixels) v = clamp01(v + value * rng.normal());
      break;
    }
    case PhotometricKind::Identity: break;
  }
  return out;
}

std::vector<GrayFrame> apply_photometric_sequence(const std::vector<GrayFrame>& frames,
                                                  const PhotometricTransform& t) {
  t.validate();
  std::vector<GrayFrame> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) out.push_back(t.apply(frames[i], i));
  return out;
}

FourPointDelta conjugate_motion(const FourPointDelta& d, const Homography& t, const FrameGeometry& geom,
                                const FrameGeometry& out_geom) {
  const Homography g = matrix_from_four_point(d, geom);
  const Homography conj = compose(compose(t, g), invert(t));
  return four_point_from_matrix(conj, out_geom);
}

FourPointDelta conjugate_motion(const FourPointDelta& d, const GeometricTransform& t, const FrameGeometry& geom) {
  if (t.kind == GeometricKind::Identity) return d;
  // T is affine and maps frame corners onto frame corners, so the conjugate
  // corner delta is the linear part of T applied to the source corner's delta.
  // Exact, unlike the matrix round trip.
  const Mat3& m = t.as_matrix(geom).matrix();
  const Eigen::Matrix2d a = m.topLeftCorner<2, 2>();
  const auto src = geom.corners();
  const auto dst = t.output_geometry(geom).corners();
  FourPointDelta out;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (a * src[j] + m.topRightCorner<2, 1>() == dst[i]) out[i] = a * d[j];
  return out;
}

FourPointDelta reestimate_motion(const GrayFrame& a, const GrayFrame& b, const GeometricTransform& t,
                                 const EstimatorConfig& cfg) {
  return estimate_motion(apply_geometric(a, t), apply_geometric(b, t), cfg);
}

Augmentation sample_augmentation(std::uint64_t seed, bool enable_geometric, bool enable_photometric) {
  Rng rng(seed);
  Augmentation aug;
  const auto g = rng.index(kAllGeometricKinds.size());
  const auto p = rng.index(kAllPhotometricKinds.size());
  const double u = rng.uniform();
  const std::uint64_t noise_seed = rng.next();
  if (enable_geometric) aug.geometric.kind = kAllGeometricKinds[g];
  if (enable_photometric) {
    switch (kAllPhotometricKinds[p]) {
      case PhotometricKind::Identity: break;
      case PhotometricKind::Gain: aug.photometric = PhotometricTransform::gain(0.5 + u); break;
      case PhotometricKind::Bias: aug.photometric = PhotometricTransform::bias(-0.2 + 0.4 * u); break;
      case PhotometricKind::Gamma: aug.photometric = PhotometricTransform::gamma(0.5 + 1.5 * u); break;
      case PhotometricKind::GaussianNoise: aug.photometric = PhotometricTransform::noise(0.05 * u, noise_seed); break;
    }
  }
  return aug;
}

}  // namespace homoflow
