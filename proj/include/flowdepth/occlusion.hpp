#pragma once

#include "flowdepth/camera.hpp"
#include "flowdepth/raster.hpp"

namespace flowdepth {

struct OcclusionConfig {
  double tau = 0.5;  // sigmoid threshold on the feature correlation
};

// Target features pulled back through depth + pose: per pixel u,
// F(u) = bilinear(fb, project(T(unproject(u, d(u), K)))). Pixels with invalid
// depth, non-positive transformed z, or an out-of-hull sample get zero
// features and in_bounds = 0.
struct WarpedFeatures {
  FeatureMap features;
  BinaryMask in_bounds;
};
WarpedFeatures warp_features(const FeatureMap& fb, const DepthMap& depth,
                             const CameraIntrinsics& K,
                             const RigidTransform& T);

// M(u) = 1 iff in_bounds(u) and sigmoid(<fa(u), warped(u)> / sqrt(C)) > tau,
// strictly.
BinaryMask occlusion_mask(const FeatureMap& fa, const FeatureMap& warped,
                          const BinaryMask& in_bounds,
                          const OcclusionConfig& cfg);

// M_flow = M_occ * f_c, elementwise.
ProbabilityMap flow_probability_mask(const BinaryMask& m_occ,
                                     const ProbabilityMap& confidence);

}  // namespace flowdepth
