#include "homoflow/homography.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "homoflow/error.hpp"

namespace homoflow {

FrameGeometry::FrameGeometry(int w, int h) : width(w), height(h) {
  if (w < 2 || h < 2) throw InvalidInput("frame geometry must be at least 2x2");
}

std::array<Vec2, 4> FrameGeometry::corners() const {
  const double x1 = width - 1.0;
  const double y1 = height - 1.0;
  return {Vec2(0.0, 0.0), Vec2(x1, 0.0), Vec2(x1, y1), Vec2(0.0, y1)};
}

Vec2 FrameGeometry::center() const { return half_extent(); }

Homography::Homography(const Mat3& m) : m_(m) {
  if (!m_.allFinite()) throw Singular("homography has non-finite entries");
  if (std::abs(m_(2, 2)) > kDeterminantEps) {
    m_ /= m_(2, 2);
  } else {
    const double norm = m_.norm();
    if (norm <= 0.0) throw Singular("zero homography");
    m_ /= norm;
    degenerate_ = true;
  }
  if (std::abs(m_.determinant()) <= kDeterminantEps) throw Singular("homography is not invertible");
}

Homography Homography::translation(double tx, double ty) {
  Mat3 m = Mat3::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

Homography Homography::from_array(std::span<const double, 9> v) {
  Mat3 m;
  m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  return Homography(m);
}

std::array<double, 9> Homography::to_array() const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[r * 3 + c] = m_(r, c);
  return out;
}

FourPointDelta FourPointDelta::from_array(std::span<const double, 8> v) {
  FourPointDelta out;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isfinite(v[2 * i]) || !std::isfinite(v[2 * i + 1]))
      throw InvalidInput("four-point delta must be finite");
    out.d[i] = Vec2(v[2 * i], v[2 * i + 1]);
  }
  return out;
}

std::array<double, 8> FourPointDelta::to_array() const {
  std::array<double, 8> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[2 * i] = d[i].x();
    out[2 * i + 1] = d[i].y();
  }
  return out;
}

FourPointDelta FourPointDelta::backward() const { return *this * -1.0; }

FourPointDelta FourPointDelta::operator+(const FourPointDelta& o) const {
  FourPointDelta out;
  for (std::size_t i = 0; i < 4; ++i) out.d[i] = d[i] + o.d[i];
  return out;
}

FourPointDelta FourPointDelta::operator-(const FourPointDelta& o) const {
  FourPointDelta out;
  for (std::size_t i = 0; i < 4; ++i) out.d[i] = d[i] - o.d[i];
  return out;
}

FourPointDelta FourPointDelta::operator*(double s) const {
  FourPointDelta out;
  for (std::size_t i = 0; i < 4; ++i) out.d[i] = d[i] * s;
  return out;
}

bool FourPointDelta::operator==(const FourPointDelta& o) const {
  for (std::size_t i = 0; i < 4; ++i)
    if (d[i] != o.d[i]) return false;
  return true;
}

Vec2 project_point(const Homography& g, const Vec2& p) {
  const Eigen::Vector3d h = g.matrix() * Eigen::Vector3d(p.x(), p.y(), 1.0);
  if (std::abs(h.z()) <= kProjectionEps) throw DegenerateProjection("point maps to infinity");
  return {h.x() / h.z(), h.y() / h.z()};
}

FourPointDelta four_point_from_matrix(const Homography& g, const FrameGeometry& geom) {
  const auto corners = geom.corners();
  FourPointDelta out;
  for (std::size_t i = 0; i < 4; ++i) out.d[i] = project_point(g, corners[i]) - corners[i];
  return out;
}

namespace {

// Similarity taking the points to zero centroid and mean distance sqrt(2).
Mat3 normalizing_transform(std::span<const Vec2> pts) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 1e-12)) throw DegenerateConfiguration("coincident points");
  const double s = std::sqrt(2.0) / mean_dist;
  Mat3 t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

}  // namespace

Homography fit_homography_dlt(std::span<const Vec2> src, std::span<const Vec2> dst) {
  if (src.size() != dst.size()) throw InvalidInput("correspondence count mismatch");
  if (src.size() < 4) throw DegenerateConfiguration("need at least 4 correspondences");
  const Mat3 ts = normalizing_transform(src);
  const Mat3 td = normalizing_transform(dst);

  const auto n = static_cast<Eigen::Index>(src.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = ts * Eigen::Vector3d(src[i].x(), src[i].y(), 1.0);
    const Eigen::Vector3d q = td * Eigen::Vector3d(dst[i].x(), dst[i].y(), 1.0);
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  // Square up 4-point systems so the full right basis (including the
  // null vector) is produced.
  if (a.rows() < 9) {
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(9, 9);
    padded.topRows(a.rows()) = a;
    a = std::move(padded);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(7) > 0.0) || sv(0) / sv(7) > kConditionLimit)
    throw DegenerateConfiguration("rank deficient correspondence system");

  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Mat3 m = td.inverse() * hn * ts;
  try {
    return Homography(m);
  } catch (const Singular&) {
    throw DegenerateConfiguration("solution is singular");
  }
}

Homography matrix_from_four_point(const FourPointDelta& d, const FrameGeometry& geom) {
  const auto corners = geom.corners();
  std::array<Vec2, 4> moved;
  for (std::size_t i = 0; i < 4; ++i) moved[i] = corners[i] + d.d[i];
  return fit_homography_dlt(corners, moved);
}

Homography compose(const Homography& a, const Homography& b) {
  return Homography(a.matrix() * b.matrix());
}

Homography invert(const Homography& g) {
  if (std::abs(g.matrix().determinant()) <= kDeterminantEps) throw Singular("cannot invert");
  return Homography(g.matrix().inverse());
}

}  // namespace homoflow
