#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

namespace homoflow {

using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDeterminantEps = 1e-12;
inline constexpr double kProjectionEps = 1e-12;
inline constexpr double kConditionLimit = 1e10;

// Pixel grid of a frame. The four reference points of the four-point
// parameterization are the frame corners in TL, TR, BR, BL order.
struct FrameGeometry {
  int width = 0;
  int height = 0;

  FrameGeometry() = default;
  FrameGeometry(int w, int h);

  std::array<Vec2, 4> corners() const;
  Vec2 center() const;
  Vec2 half_extent() const { return {(width - 1) / 2.0, (height - 1) / 2.0}; }

  bool operator==(const FrameGeometry&) const = default;
};

// Projective map on homogeneous pixel coordinates, stored at canonical scale:
// m(2,2) == 1 when |m(2,2)| > 1e-12, otherwise unit Frobenius norm with the
// degenerate flag set.
class Homography {
 public:
  Homography() : m_(Mat3::Identity()) {}
  // Throws Singular if the matrix is not invertible.
  explicit Homography(const Mat3& m);

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty);
  static Homography from_array(std::span<const double, 9> row_major);

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }
  bool degenerate() const { return degenerate_; }

  std::array<double, 9> to_array() const;

 private:
  Mat3 m_;
  bool degenerate_ = false;
};

// Forward corner displacements d_i = project(G, p_i) - p_i, TL, TR, BR, BL.
struct FourPointDelta {
  std::array<Vec2, 4> d{Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};

  static FourPointDelta zero() { return {}; }
  static FourPointDelta uniform(const Vec2& v) { return {{v, v, v, v}}; }
  // Throws InvalidInput on non-finite values.
  static FourPointDelta from_array(std::span<const double, 8> values);

  std::array<double, 8> to_array() const;

  // Displacements in the p_i - p'_i orientation.
  FourPointDelta backward() const;

  const Vec2& operator[](std::size_t i) const { return d[i]; }
  Vec2& operator[](std::size_t i) { return d[i]; }

  FourPointDelta operator+(const FourPointDelta& o) const;
  FourPointDelta operator-(const FourPointDelta& o) const;
  FourPointDelta operator*(double s) const;
  bool operator==(const FourPointDelta& o) const;
};

// Throws DegenerateProjection when the homogeneous w is ~0.
Vec2 project_point(const Homography& g, const Vec2& p);

FourPointDelta four_point_from_matrix(const Homography& g, const FrameGeometry& geom);

// Exact four-point solve. Throws DegenerateConfiguration when the corner
// correspondences are not in general position.
Homography matrix_from_four_point(const FourPointDelta& d, const FrameGeometry& geom);

// Normalized product a * b, i.e. apply b first.
Homography compose(const Homography& a, const Homography& b);

Homography invert(const Homography& g);

// Least-squares direct linear transform with Hartley normalization, for
// n >= 4 correspondences src[i] -> dst[i]. Throws DegenerateConfiguration on a
// rank deficient system (condition number above kConditionLimit).
Homography fit_homography_dlt(std::span<const Vec2> src, std::span<const Vec2> dst);

}  // namespace homoflow
