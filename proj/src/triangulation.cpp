#include "flowdepth/triangulation.hpp"

#include <cmath>
#include <stdexcept>

namespace flowdepth {

TriangulatedDepth triangulate_pixel(const Eigen::Vector2d& u,
                                    const Eigen::Vector2d& flow,
                                    const CameraIntrinsics& K,
                                    const RigidTransform& T,
                                    const TriangulationConfig& cfg) {
  const Eigen::Vector3d u_src(u.x(), u.y(), 1.0);
  const Eigen::Vector3d u_dst(u.x() + flow.x(), u.y() + flow.y(), 1.0);

  // K R K^-1 u~ without forming K^-1: K^-1 u~ = ((ux-cx)/fx, (uy-cy)/fy, 1).
  const Eigen::Vector3d ray((u.x() - K.cx) / K.fx, (u.y() - K.cy) / K.fy, 1.0);
  const Eigen::Vector3d rr = T.rotation * ray;
  const Eigen::Vector3d kr(K.fx * rr.x() + K.cx * rr.z(),
                           K.fy * rr.y() + K.cy * rr.z(), rr.z());
  const Eigen::Vector3d kt(K.fx * T.translation.x() + K.cx * T.translation.z(),
                           K.fy * T.translation.y() + K.cy * T.translation.z(),
                           T.translation.z());

  const double k_norm = std::sqrt(K.fx * K.fx + K.fy * K.fy + K.cx * K.cx +
                                  K.cy * K.cy + 1.0);
  const Eigen::Vector3d a = u_dst.cross(kr) / k_norm;
  const Eigen::Vector3d b = u_dst.cross(kt) / k_norm;

  TriangulatedDepth out;
  const double aa = a.dot(a);
  if (!(aa >= cfg.min_denominator)) return out;
  const double d = -a.dot(b) / aa;
  if (!std::isfinite(d) || d < cfg.min_depth || d > cfg.max_depth) return out;
  out.depth = d;
  out.valid = true;
  return out;
}

DepthMap flow_depth_map(const FlowField& flow, const CameraIntrinsics& K,
                        const RigidTransform& T,
                        const TriangulationConfig& cfg) {
  if (flow.channels() != 2)
    throw std::invalid_argument("flow_depth_map: flow must have 2 channels");
  const int w = flow.width(), h = flow.height();
  DepthMap out(w, h, 0.0, false);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const TriangulatedDepth t = triangulate_pixel(
          {double(x), double(y)}, {flow.at(x, y, 0), flow.at(x, y, 1)}, K, T,
          cfg);
      if (t.valid) {
        out.data.at(x, y) = t.depth;
        out.validity.at(x, y) = 1;
      }
    }
  return out;
}

}  // namespace flowdepth
