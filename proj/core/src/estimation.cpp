#include "homoflow/estimation.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "homoflow/error.hpp"
#include "homoflow/random.hpp"

namespace homoflow {

namespace {

constexpr int kCornerBorder = 3;
constexpr double kQualityLevel = 0.01;
constexpr double kMinResponse = 1e-6;
constexpr double kMinZncc = 0.5;
constexpr double kRansacConfidence = 0.999;
constexpr int kRefineHalf = 7;
constexpr int kRefineIters = 10;
constexpr double kRefineMaxShift = 1.5;
constexpr double kRefinedThreshold = 0.3;
constexpr double kThresholdPerSigma = 3.0;

double triangle_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
  return std::abs((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

bool has_collinear_triple(const std::array<Vec2, 4>& pts) {
  constexpr double kMinArea2 = 1e-6;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (triangle_area2(pts[i], pts[j], pts[k]) < kMinArea2) return true;
  return false;
}

}  // namespace

void RansacConfig::validate() const {
  if (max_iters < 1) throw ParameterOutOfRange("max_iters must be >= 1");
  if (!(inlier_threshold > 0.0)) throw ParameterOutOfRange("inlier_threshold must be > 0");
  if (!(min_inlier_ratio > 0.0 && min_inlier_ratio <= 1.0))
    throw ParameterOutOfRange("min_inlier_ratio must be in (0, 1]");
}

std::vector<double> corner_response(const GrayFrame& f) {
  const int w = f.width, h = f.height;
  const auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
  std::vector<double> gxx(f.pixels.size(), 0.0), gxy(f.pixels.size(), 0.0), gyy(f.pixels.size(), 0.0);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double gx = (f.at(x + 1, y - 1) + 2.0 * f.at(x + 1, y) + f.at(x + 1, y + 1)) -
                        (f.at(x - 1, y - 1) + 2.0 * f.at(x - 1, y) + f.at(x - 1, y + 1));
      const double gy = (f.at(x - 1, y + 1) + 2.0 * f.at(x, y + 1) + f.at(x + 1, y + 1)) -
                        (f.at(x - 1, y - 1) + 2.0 * f.at(x, y - 1) + f.at(x + 1, y - 1));
      gxx[idx(x, y)] = gx * gx;
      gxy[idx(x, y)] = gx * gy;
      gyy[idx(x, y)] = gy * gy;
    }
  }
  // Separable 5x5 box sums.
  auto box = [&](const std::vector<double>& in) {
    std::vector<double> rows(in.size(), 0.0), out(in.size(), 0.0);
    for (int y = 0; y < h; ++y)
      for (int x = 2; x < w - 2; ++x) {
        double s = 0.0;
        for (int k = -2; k <= 2; ++k) s += in[idx(x + k, y)];
        rows[idx(x, y)] = s;
      }
    for (int y = 2; y < h - 2; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int k = -2; k <= 2; ++k) s += rows[idx(x, y + k)];
        out[idx(x, y)] = s;
      }
    return out;
  };
  const auto sxx = box(gxx), sxy = box(gxy), syy = box(gyy);
  std::vector<double> response(f.pixels.size(), 0.0);
  for (int y = kCornerBorder; y < h - kCornerBorder; ++y) {
    for (int x = kCornerBorder; x < w - kCornerBorder; ++x) {
      const std::size_t i = idx(x, y);
      const double half_trace = 0.5 * (sxx[i] + syy[i]);
      const double half_diff = 0.5 * (sxx[i] - syy[i]);
      response[i] = std::max(0.0, half_trace - std::sqrt(half_diff * half_diff + sxy[i] * sxy[i]));
    }
  }
  return response;
}

std::vector<Vec2> detect_corners(const GrayFrame& f, int max_count, double min_distance) {
  if (f.width < 16 || f.height < 16) throw InvalidInput("frame must be at least 16x16");
  const int w = f.width, h = f.height;
  const auto response = corner_response(f);
  const double peak = *std::max_element(response.begin(), response.end());
  const double threshold = std::max(kMinResponse, kQualityLevel * peak);

  struct Candidate {
    double r;
    int x, y;
  };
  std::vector<Candidate> candidates;
  for (int y = kCornerBorder; y < h - kCornerBorder; ++y) {
    for (int x = kCornerBorder; x < w - kCornerBorder; ++x) {
      const double r = response[static_cast<std::size_t>(y) * w + x];
      if (r < threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if ((dx || dy) && response[static_cast<std::size_t>(y + dy) * w + (x + dx)] > r) {
            is_max = false;
            break;
          }
      if (is_max) candidates.push_back({r, x, y});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.r > b.r; });

  std::vector<Vec2> corners;
  const double min_d2 = min_distance * min_distance;
  for (const auto& c : candidates) {
    if (max_count > 0 && static_cast<int>(corners.size()) >= max_count) break;
    const Vec2 p(c.x, c.y);
    const bool crowded = std::any_of(corners.begin(), corners.end(),
                                     [&](const Vec2& q) { return (q - p).squaredNorm() < min_d2; });
    if (!crowded) corners.push_back(p);
  }
  if (corners.size() < 8) throw TooFewFeatures("fewer than 8 corners detected");
  return corners;
}

CorrespondenceSet match_patches(const GrayFrame& a, const GrayFrame& b, const std::vector<Vec2>& points,
                                int window, int search_radius) {
  if (window < 5 || window % 2 == 0) throw ParameterOutOfRange("window must be odd and >= 5");
  if (search_radius < 1) throw ParameterOutOfRange("search_radius must be >= 1");
  const int half = window / 2;
  const int n = window * window;
  const int span = 2 * search_radius + 1;

  CorrespondenceSet out;
  std::vector<double> tmpl(static_cast<std::size_t>(n));
  std::vector<double> scores(static_cast<std::size_t>(span) * span);

  for (const auto& point : points) {
    const int px = static_cast<int>(std::lround(point.x()));
    const int py = static_cast<int>(std::lround(point.y()));
    if (px - half < 0 || py - half < 0 || px + half >= a.width || py + half >= a.height) continue;

    double mean_t = 0.0;
    for (int v = -half, k = 0; v <= half; ++v)
      for (int u = -half; u <= half; ++u, ++k) {
        tmpl[k] = a.at(px + u, py + v);
        mean_t += tmpl[k];
      }
    mean_t /= n;
    double var_t = 0.0;
    for (auto& t : tmpl) {
      t -= mean_t;
      var_t += t * t;
    }
    if (var_t < 1e-10) continue;
    const double norm_t = std::sqrt(var_t);

    std::fill(scores.begin(), scores.end(), -2.0);
    double best = -2.0;
    int best_dx = 0, best_dy = 0;
    for (int dy = -search_radius; dy <= search_radius; ++dy) {
      const int cy = py + dy;
      if (cy - half < 0 || cy + half >= b.height) continue;
      for (int dx = -search_radius; dx <= search_radius; ++dx) {
        const int cx = px + dx;
        if (cx - half < 0 || cx + half >= b.width) continue;
        double s = 0.0, s2 = 0.0, st = 0.0;
        for (int v = -half, k = 0; v <= half; ++v) {
          const float* row = &b.pixels[static_cast<std::size_t>(cy + v) * b.width + (cx - half)];
          for (int u = 0; u < window; ++u, ++k) {
            const double val = row[u];
            s += val;
            s2 += val * val;
            st += val * tmpl[k];
          }
        }
        const double var_s = s2 - s * s / n;
        if (var_s < 1e-10) continue;
        const double zncc = st / (norm_t * std::sqrt(var_s));
        scores[static_cast<std::size_t>(dy + search_radius) * span + (dx + search_radius)] = zncc;
        if (zncc > best) {
          best = zncc;
          best_dx = dx;
          best_dy = dy;
        }
      }
    }
    if (best < kMinZncc) continue;

    auto score_at = [&](int dx, int dy) {
      if (std::abs(dx) > search_radius || std::abs(dy) > search_radius) return -2.0;
      return scores[static_cast<std::size_t>(dy + search_radius) * span + (dx + search_radius)];
    };
    auto parabola = [](double left, double centre, double right) {
      if (left < -1.5 || right < -1.5) return 0.0;
      const double denom = left - 2.0 * centre + right;
      if (denom >= 0.0) return 0.0;
      return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
    };
    double sub_x = 0.0, sub_y = 0.0;
    if (best < 1.0 - 1e-9) {
      sub_x = parabola(score_at(best_dx - 1, best_dy), best, score_at(best_dx + 1, best_dy));
      sub_y = parabola(score_at(best_dx, best_dy - 1), best, score_at(best_dx, best_dy + 1));
    }
    out.pairs.push_back({Vec2(px, py), Vec2(px + best_dx + sub_x, py + best_dy + sub_y), std::min(best, 1.0)});
  }
  return out;
}

Homography dlt_homography(const CorrespondenceSet& c) {
  if (c.size() < 4) throw DegenerateConfiguration("need at least 4 correspondences");
  std::vector<Vec2> src, dst;
  src.reserve(c.size());
  dst.reserve(c.size());
  for (const auto& pr : c.pairs) {
    src.push_back(pr.p);
    dst.push_back(pr.q);
  }
  return fit_homography_dlt(src, dst);
}

double symmetric_transfer_error(const Homography& g, const Homography& g_inv, const Vec2& p, const Vec2& q) {
  const Mat3& m = g.matrix();
  const Mat3& mi = g_inv.matrix();
  const double w1 = m(2, 0) * p.x() + m(2, 1) * p.y() + m(2, 2);
  const double w2 = mi(2, 0) * q.x() + mi(2, 1) * q.y() + mi(2, 2);
  if (std::abs(w1) <= kProjectionEps || std::abs(w2) <= kProjectionEps)
    return std::numeric_limits<double>::infinity();
  const double fx = (m(0, 0) * p.x() + m(0, 1) * p.y() + m(0, 2)) / w1 - q.x();
  const double fy = (m(1, 0) * p.x() + m(1, 1) * p.y() + m(1, 2)) / w1 - q.y();
  const double bx = (mi(0, 0) * q.x() + mi(0, 1) * q.y() + mi(0, 2)) / w2 - p.x();
  const double by = (mi(1, 0) * q.x() + mi(1, 1) * q.y() + mi(1, 2)) / w2 - p.y();
  return std::sqrt(0.5 * (fx * fx + fy * fy + bx * bx + by * by));
}

namespace {

struct Score {
  std::size_t count = 0;
  double mean_error = std::numeric_limits<double>::infinity();
};

Score score_model(const CorrespondenceSet& c, const Homography& g, const Homography& g_inv, double thr,
                  std::vector<bool>* mask) {
  Score s;
  double sum = 0.0;
  if (mask) mask->assign(c.size(), false);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double e = symmetric_transfer_error(g, g_inv, c.pairs[i].p, c.pairs[i].q);
    if (e < thr) {
      ++s.count;
      sum += e;
      if (mask) (*mask)[i] = true;
    }
  }
  if (s.count) s.mean_error = sum / static_cast<double>(s.count);
  return s;
}

bool better(const Score& a, const Score& b) {
  return a.count > b.count || (a.count == b.count && a.mean_error < b.mean_error);
}

}  // namespace

RansacResult ransac_homography(const CorrespondenceSet& c, const RansacConfig& cfg) {
  cfg.validate();
  if (c.size() < 8) throw TooFewFeatures("RANSAC needs at least 8 correspondences");
  const std::size_t n = c.size();
  Rng rng(cfg.seed);

  Score best_score;
  std::optional<Homography> best;
  double needed = cfg.max_iters;
  int iter = 0;
  for (; iter < cfg.max_iters && iter < needed; ++iter) {
    std::array<std::size_t, 4> idx{};
    for (int k = 0; k < 4; ++k) {
      bool fresh;
      do {
        idx[k] = rng.index(n);
        fresh = std::find(idx.begin(), idx.begin() + k, idx[k]) == idx.begin() + k;
      } while (!fresh);
    }
    std::array<Vec2, 4> src, dst;
    for (int k = 0; k < 4; ++k) {
      src[k] = c.pairs[idx[k]].p;
      dst[k] = c.pairs[idx[k]].q;
    }
    if (has_collinear_triple(src) || has_collinear_triple(dst)) continue;
    try {
      Homography g = fit_homography_dlt(src, dst);
      Score s = score_model(c, g, invert(g), cfg.inlier_threshold, nullptr);
      if (better(s, best_score)) {
        // Local optimization: a noisy minimal sample under-counts its own
        // support, so refit on the consensus before it sets the stop criterion.
        for (int round = 0; round < 3; ++round) {
          std::vector<bool> mask;
          score_model(c, g, invert(g), cfg.inlier_threshold, &mask);
          CorrespondenceSet support;
          for (std::size_t i = 0; i < n; ++i)
            if (mask[i]) support.pairs.push_back(c.pairs[i]);
          if (support.size() < 5) break;
          try {
            const Homography refit = dlt_homography(support);
            const Score rs = score_model(c, refit, invert(refit), cfg.inlier_threshold, nullptr);
            if (!better(rs, s)) break;
            g = refit;
            s = rs;
          } catch (const Error&) {
            break;
          }
        }
        best_score = s;
        best = g;
        const double w = static_cast<double>(s.count) / static_cast<double>(n);
        const double miss = 1.0 - std::pow(w, 4);
        if (miss <= 0.0) {
          needed = 0;
        } else if (miss < 1.0) {
          needed = std::log(1.0 - kRansacConfidence) / std::log(miss);
        }
      }
    } catch (const Error&) {
      continue;
    }
  }
  if (!best || best_score.count < 4) throw NoConsensus("no hypothesis reached consensus");

  RansacResult result{*best, {}, 0, iter};
  score_model(c, *best, invert(*best), cfg.inlier_threshold, &result.inliers);
  result.inlier_count = best_score.count;

  // Refit on the consensus set until it stops changing.
  for (int round = 0; round < 5; ++round) {
    CorrespondenceSet support;
    for (std::size_t i = 0; i < n; ++i)
      if (result.inliers[i]) support.pairs.push_back(c.pairs[i]);
    try {
      const Homography refined = dlt_homography(support);
      std::vector<bool> mask;
      const Score s = score_model(c, refined, invert(refined), cfg.inlier_threshold, &mask);
      if (s.count < result.inlier_count) break;
      const bool same = mask == result.inliers;
      result.model = refined;
      result.inliers = std::move(mask);
      result.inlier_count = s.count;
      if (same) break;
    } catch (const Error&) {
      break;
    }
  }

  if (result.inlier_ratio() < cfg.min_inlier_ratio)
    throw NoConsensus("inlier ratio below min_inlier_ratio");
  return result;
}

namespace {

struct RefinedMatch {
  Vec2 q;
  double sigma = 0.0;  // positional standard deviation along the weakest direction
};

// Gauss-Newton correction t of a match q so that b, sampled on the patch
// around p carried through g and re-anchored at q + t, matches a (zero-mean
// intensities). nullopt when the patch leaves b, the system is flat or the
// correction runs away.
std::optional<RefinedMatch> refine_match(const GrayFrame& a, const GrayFrame& b, const Homography& g, const Vec2& p,
                                 const Vec2& q) {
  constexpr int n = (2 * kRefineHalf + 1) * (2 * kRefineHalf + 1);
  const int px = static_cast<int>(p.x()), py = static_cast<int>(p.y());
  if (px - kRefineHalf < 0 || py - kRefineHalf < 0 || px + kRefineHalf >= a.width || py + kRefineHalf >= a.height)
    return std::nullopt;
  std::array<double, n> tmpl{};
  std::array<Vec2, n> offset;
  double mean_t = 0.0;
  const Vec2 gp = project_point(g, p);
  for (int v = -kRefineHalf, k = 0; v <= kRefineHalf; ++v)
    for (int u = -kRefineHalf; u <= kRefineHalf; ++u, ++k) {
      tmpl[k] = a.at(px + u, py + v);
      mean_t += tmpl[k];
      offset[k] = project_point(g, Vec2(px + u, py + v)) - gp;
    }
  mean_t /= n;
  for (auto& t : tmpl) t -= mean_t;

  Vec2 t = Vec2::Zero();
  std::array<double, n> val{};
  std::array<Vec2, n> grad;
  double sigma2 = 0.0;
  for (int it = 0; it < kRefineIters; ++it) {
    double mean_b = 0.0;
    for (int k = 0; k < n; ++k) {
      const Vec2 x = q + t + offset[k];
      if (!b.contains(x.x() - 1.0, x.y() - 1.0) || !b.contains(x.x() + 1.0, x.y() + 1.0)) return std::nullopt;
      val[k] = b.sample(x.x(), x.y());
      grad[k] = 0.5 * Vec2(b.sample(x.x() + 1.0, x.y()) - b.sample(x.x() - 1.0, x.y()),
                           b.sample(x.x(), x.y() + 1.0) - b.sample(x.x(), x.y() - 1.0));
      mean_b += val[k];
    }
    mean_b /= n;
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    Vec2 rhs = Vec2::Zero();
    Vec2 mean_grad = Vec2::Zero();
    for (int k = 0; k < n; ++k) mean_grad += grad[k];
    mean_grad /= n;
    for (int k = 0; k < n; ++k) {
      const Vec2 j = grad[k] - mean_grad;
      h += j * j.transpose();
      rhs += j * (val[k] - mean_b - tmpl[k]);
    }
    if (h.determinant() <= 1e-12 * h.trace() * h.trace() || h.trace() <= 0.0) return std::nullopt;
    const Vec2 step = -h.inverse() * rhs;
    t += step;
    if (t.norm() > kRefineMaxShift) return std::nullopt;
    // Residual variance at the last linearization, propagated through H^-1.
    double sse = 0.0;
    for (int k = 0; k < n; ++k) {
      const double r = val[k] - mean_b - tmpl[k];
      sse += r * r;
    }
    sigma2 = sse / (n - 3) * h.inverse().eigenvalues().real().maxCoeff();
    if (step.norm() < 1e-3) break;
  }
  return RefinedMatch{q + t, std::sqrt(std::max(sigma2, 0.0))};
}

}  // namespace

FourPointDelta estimate_motion(const GrayFrame& a, const GrayFrame& b, const EstimatorConfig& cfg) {
  if (a.width != b.width || a.height != b.height) throw DimensionMismatch("frame sizes differ");
  const auto corners = detect_corners(a, cfg.max_corners, cfg.min_distance);
  const auto matches = match_patches(a, b, corners, cfg.window, cfg.search_radius);
  if (matches.size() < 8) throw TooFewFeatures("fewer than 8 patch matches");

  std::vector<double> sigmas;
  auto refine_all = [&](const CorrespondenceSet& in, const Homography& g, const std::vector<bool>* keep) {
    CorrespondenceSet out;
    sigmas.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (keep && !(*keep)[i]) continue;
      const auto& m = in.pairs[i];
      if (const auto r = refine_match(a, b, g, m.p, m.q)) {
        out.pairs.push_back({m.p, r->q, m.score});
        sigmas.push_back(r->sigma);
      }
    }
    return out;
  };
  // Threshold scaled to the typical sub-pixel match uncertainty.
  auto tight_config = [&] {
    RansacConfig tight = cfg.ransac;
    double scale = 0.0;
    if (!sigmas.empty()) {
      auto mid = sigmas.begin() + static_cast<std::ptrdiff_t>(sigmas.size() / 2);
      std::nth_element(sigmas.begin(), mid, sigmas.end());
      scale = *mid;
    }
    tight.inlier_threshold =
        std::min(cfg.ransac.inlier_threshold, std::max(kRefinedThreshold, kThresholdPerSigma * scale));
    return tight;
  };

  // Sub-pixel matches let the consensus run at a threshold tight enough to
  // keep an independently moving object out of the background model; a
  // coarse threshold admits hybrid homographies spanning both.
  std::optional<RansacResult> fit;
  CorrespondenceSet fine = refine_all(matches, Homography::identity(), nullptr);
  if (fine.size() >= 8) {
    try {
      fit = ransac_homography(fine, tight_config());
    } catch (const NoConsensus&) {
    }
  }
  if (!fit) {
    fine = matches;
    fit = ransac_homography(matches, cfg.ransac);
  }

  // Second pass: refine the consensus against the patch deformation of the model.
  const CorrespondenceSet warped = refine_all(fine, fit->model, &fit->inliers);
  if (warped.size() >= 8) {
    try {
      fit = ransac_homography(warped, tight_config());
    } catch (const NoConsensus&) {
    }
  }
  return four_point_from_matrix(fit->model, a.geometry());
}

FourPointDelta estimate_motion(const GrayFrame& a, const GrayFrame& b, const RansacConfig& cfg) {
  EstimatorConfig full;
  full.ransac = cfg;
  return estimate_motion(a, b, full);
}

}  // namespace homoflow
