#include "flowdepth/occlusion.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "flowdepth/sampling.hpp"

namespace flowdepth {

WarpedFeatures warp_features(const FeatureMap& fb, const DepthMap& depth,
                             const CameraIntrinsics& K,
                             const RigidTransform& T) {
  require_same_extent(fb, depth, "target features vs depth");
  const int w = fb.width(), h = fb.height(), c = fb.channels();

  WarpedFeatures out;
  out.features = FeatureMap(w, h, c, 0.0);
  out.in_bounds = BinaryMask(w, h, 1, 0);
  std::vector<double> sample(c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(x, y)) continue;
      const Eigen::Vector3d p =
          unproject({double(x), double(y)}, depth.data.at(x, y), K);
      const Eigen::Vector3d q = transform_point(p, T);
      if (!(q.z() > 0)) continue;  // behind the target camera
      const Eigen::Vector2d u = project(q, K);
      if (!bilinear_sample(fb, u.x(), u.y(), sample.data())) continue;
      for (int j = 0; j < c; ++j) out.features.at(x, y, j) = sample[j];
      out.in_bounds.at(x, y) = 1;
    }
  return out;
}

BinaryMask occlusion_mask(const FeatureMap& fa, const FeatureMap& warped,
                          const BinaryMask& in_bounds,
                          const OcclusionConfig& cfg) {
  if (!fa.same_shape(warped))
    throw std::invalid_argument("occlusion_mask: feature shapes differ");
  require_same_extent(fa, in_bounds, "features vs in-bounds mask");
  const int w = fa.width(), h = fa.height(), c = fa.channels();
  const double inv_sqrt_c = 1.0 / std::sqrt(double(c));

  BinaryMask mask(w, h, 1, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!in_bounds.at(x, y)) continue;
      double dot = 0.0;
      for (int j = 0; j < c; ++j) dot += fa.at(x, y, j) * warped.at(x, y, j);
      const double s = 1.0 / (1.0 + std::exp(-dot * inv_sqrt_c));
      mask.at(x, y) = s > cfg.tau ? 1 : 0;
    }
  return mask;
}

ProbabilityMap flow_probability_mask(const BinaryMask& m_occ,
                                     const ProbabilityMap& confidence) {
  require_same_extent(m_occ, confidence, "occlusion mask vs confidence");
  ProbabilityMap out(m_occ.width(), m_occ.height(), 1, 0.0);
  for (int y = 0; y < m_occ.height(); ++y)
    for (int x = 0; x < m_occ.width(); ++x)
      out.at(x, y) = m_occ.at(x, y) ? confidence.at(x, y) : 0.0;
  return out;
}

}  // namespace flowdepth
