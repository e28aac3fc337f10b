#pragma once

#include <cstdint>
#include <vector>

#include "homoflow/homography.hpp"
#include "homoflow/image.hpp"

namespace homoflow {

struct Correspondence {
  Vec2 p;  // frame A
  Vec2 q;  // frame B
  double score = 1.0;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

struct RansacConfig {
  int max_iters = 2000;
  double inlier_threshold = 2.0;  // symmetric transfer error, pixels
  double min_inlier_ratio = 0.3;
  std::uint64_t seed = 0;

  // Throws ParameterOutOfRange.
  void validate() const;
};

struct EstimatorConfig {
  int max_corners = 300;
  double min_distance = 8.0;
  int window = 11;
  int search_radius = 20;
  RansacConfig ransac;
};

struct RansacResult {
  Homography model;
  std::vector<bool> inliers;
  std::size_t inlier_count = 0;
  int iterations = 0;

  double inlier_ratio() const {
    return inliers.empty() ? 0.0 : static_cast<double>(inlier_count) / static_cast<double>(inliers.size());
  }
};

// Minimum-eigenvalue corner response on a 5x5 structure-tensor window of
// Sobel gradients. Entries closer than 3 px to the border are zero.
std::vector<double> corner_response(const GrayFrame& f);

// Local maxima of corner_response above 1% of the strongest response,
// greedily thinned to `min_distance`, strongest first.
// Throws TooFewFeatures below 8 corners.
std::vector<Vec2> detect_corners(const GrayFrame& f, int max_count, double min_distance);

// Best zero-normalized cross-correlation match of each point's window within
// `search_radius`, refined to sub-pixel by a parabola through the peak.
// Pairs scoring below 0.5 are dropped.
CorrespondenceSet match_patches(const GrayFrame& a, const GrayFrame& b, const std::vector<Vec2>& points,
                                int window, int search_radius);

Homography dlt_homography(const CorrespondenceSet& c);

// RMS of forward and backward reprojection distances.
double symmetric_transfer_error(const Homography& g, const Homography& g_inv, const Vec2& p, const Vec2& q);

// Deterministic given cfg.seed. Throws TooFewFeatures below 8 pairs and
// NoConsensus when the best inlier ratio is under cfg.min_inlier_ratio.
RansacResult ransac_homography(const CorrespondenceSet& c, const RansacConfig& cfg);

// Dominant-plane motion of b relative to a, forward convention.
FourPointDelta estimate_motion(const GrayFrame& a, const GrayFrame& b, const EstimatorConfig& cfg);
FourPointDelta estimate_motion(const GrayFrame& a, const GrayFrame& b, const RansacConfig& cfg);

}  // namespace homoflow
