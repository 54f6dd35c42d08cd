#pragma once

#include "flowdepth/camera.hpp"
#include "flowdepth/raster.hpp"

namespace flowdepth {

struct TriangulationConfig {
  // Threshold on |a|^2 after scaling a by 1/|K|_F, making the degeneracy
  // test resolution-independent.
  double min_denominator = 1e-12;
  double min_depth = 0.1;   // meters
  double max_depth = 500.0; // meters
};

// Closed-form least-squares depth along the source ray: with u~ = (ux, uy, 1)
// and u' = (ux + flow_x, uy + flow_y, 1),
//   a = u' x (K R K^-1 u~),  b = u' x (K t),  d* = -(a.b) / (a.a),
// the minimizer of |u' x (K (R (d K^-1 u~) + t))|^2 over d. Degenerate
// denominators and out-of-range depths yield valid = false, never throw.
struct TriangulatedDepth {
  double depth = 0.0;
  bool valid = false;
};
TriangulatedDepth triangulate_pixel(const Eigen::Vector2d& u,
                                    const Eigen::Vector2d& flow,
                                    const CameraIntrinsics& K,
                                    const RigidTransform& T,
                                    const TriangulationConfig& cfg);

// Per-pixel triangulation of a flow field. Invalid pixels carry 0 depth.
DepthMap flow_depth_map(const FlowField& flow, const CameraIntrinsics& K,
                        const RigidTransform& T,
                        const TriangulationConfig& cfg);

}  // namespace flowdepth
