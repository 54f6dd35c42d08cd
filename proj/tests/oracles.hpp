#pragma once

// Independent reference implementations used to freeze expected behavior.
// Everything here is written from the operation definitions alone, in plain
// loops, sharing no code with the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "flowdepth/camera.hpp"
#include "flowdepth/raster.hpp"

namespace oracle {

// Naive full-window matching reference. Per pixel: normalize depth, pick the
// radius, walk the full (2 r_max + 1)^2 window in canonical order (dy outer,
// dx inner), score in-window in-bounds offsets by direct integer lookup,
// softmax with max subtraction, peak probability and expected displacement.
struct NaiveMatch {
  flowdepth::FlowField flow;
  flowdepth::ProbabilityMap confidence;
  flowdepth::Raster<int> radius;
};

inline NaiveMatch naive_matching(const flowdepth::FeatureMap& fa,
                                 const flowdepth::FeatureMap& fb,
                                 const flowdepth::DepthMap& d_hyb, int r_min,
                                 int r_max, double epsilon) {
  const int w = fa.width(), h = fa.height(), c = fa.channels();

  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (d_hyb.valid(x, y)) {
        dmin = std::min(dmin, d_hyb.data.at(x, y));
        dmax = std::max(dmax, d_hyb.data.at(x, y));
      }

  NaiveMatch out;
  out.flow = flowdepth::FlowField(w, h, 2, 0.0);
  out.confidence = flowdepth::ProbabilityMap(w, h, 1, 0.0);
  out.radius = flowdepth::Raster<int>(w, h, 1, 0);

  const double inv_sqrt_c = 1.0 / std::sqrt(double(c));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double dn = 0.0;
      if (d_hyb.valid(x, y))
        dn = (d_hyb.data.at(x, y) - dmin) / (dmax - dmin + epsilon);
      int r = int(std::floor(r_min + dn * (r_max - r_min)));
      r = std::clamp(r, r_min, r_max);
      out.radius.at(x, y) = r;

      std::vector<double> scores;
      std::vector<int> dxs, dys;
      for (int dy = -r_max; dy <= r_max; ++dy)
        for (int dx = -r_max; dx <= r_max; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) > r) continue;
          const int sx = x + dx, sy = y + dy;
          if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
          double dot = 0.0;
          for (int k = 0; k < c; ++k) dot += fa.at(x, y, k) * fb.at(sx, sy, k);
          scores.push_back(dot * inv_sqrt_c);
          dxs.push_back(dx);
          dys.push_back(dy);
        }

      double smax = -std::numeric_limits<double>::infinity();
      for (double s : scores) smax = std::max(smax, s);
      std::vector<double> e(scores.size());
      double z = 0.0;
      for (size_t k = 0; k < scores.size(); ++k) {
        e[k] = std::exp(scores[k] - smax);
        z += e[k];
      }
      double best = 0.0, fx = 0.0, fy = 0.0;
      for (size_t k = 0; k < scores.size(); ++k) {
        const double p = e[k] / z;
        best = std::max(best, p);
        fx += p * dxs[k];
        fy += p * dys[k];
      }
      out.flow.at(x, y, 0) = fx;
      out.flow.at(x, y, 1) = fy;
      out.confidence.at(x, y) = best;
    }
  return out;
}

// Dense 1-D scan of the reprojected-ray objective
// |u' x (K (R (d K^-1 u~) + t))|^2 over [d_lo, d_hi].
inline double scan_triangulation(const Eigen::Vector2d& u,
                                 const Eigen::Vector2d& flow,
                                 const flowdepth::CameraIntrinsics& K,
                                 const flowdepth::RigidTransform& T,
                                 double d_lo, double d_hi, int samples) {
  const Eigen::Matrix3d Km = K.kmatrix();
  const Eigen::Vector3d ray = Km.inverse() * Eigen::Vector3d(u.x(), u.y(), 1.0);
  const Eigen::Vector3d u2(u.x() + flow.x(), u.y() + flow.y(), 1.0);
  double best_d = d_lo;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double d = d_lo + (d_hi - d_lo) * double(i) / double(samples - 1);
    const Eigen::Vector3d proj = Km * (T.rotation * (d * ray) + T.translation);
    const double v = u2.cross(proj).squaredNorm();
    if (v < best_v) {
      best_v = v;
      best_d = d;
    }
  }
  return best_d;
}

// Brute-force softmax over explicit scores (inclusion flags honored).
struct SoftmaxOracle {
  std::vector<double> prob;
  double peak = 0.0;
  double mean_dx = 0.0, mean_dy = 0.0;
};

inline SoftmaxOracle brute_softmax(const std::vector<double>& scores,
                                   const std::vector<int>& dx,
                                   const std::vector<int>& dy,
                                   const std::vector<bool>& included) {
  SoftmaxOracle out;
  out.prob.assign(scores.size(), 0.0);
  double smax = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < scores.size(); ++i)
    if (included[i]) smax = std::max(smax, scores[i]);
  double z = 0.0;
  for (size_t i = 0; i < scores.size(); ++i)
    if (included[i]) z += std::exp(scores[i] - smax);
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!included[i]) continue;
    out.prob[i] = std::exp(scores[i] - smax) / z;
    out.peak = std::max(out.peak, out.prob[i]);
    out.mean_dx += out.prob[i] * dx[i];
    out.mean_dy += out.prob[i] * dy[i];
  }
  return out;
}

}  // namespace oracle
