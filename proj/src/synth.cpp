#include "flowdepth/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "flowdepth/sampling.hpp"

namespace flowdepth {

namespace {

constexpr int kSinusoids = 8;
constexpr double kZTolerance = 1e-6;  // meters, visibility z-test
// Per-channel RMS of the normalized descriptors. Sized so the correlation
// peak stands far enough above window scores for sub-0.1 px expected flow.
constexpr double kFeatureAmp = 4.0;

double uniform_unit(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

struct SinusoidBank {
  // Per channel, kSinusoids components over surface coordinates measured in
  // view-1 pixels at the surface's depth.
  struct Component {
    double fx, fy, phase, amp;
  };
  std::vector<std::vector<Component>> channels;

  double eval(int channel, double qx, double qy) const {
    double v = 0.0;
    for (const Component& c : channels[channel])
      v += c.amp * std::sin(2.0 * std::numbers::pi * (c.fx * qx + c.fy * qy) +
                            c.phase);
    return v;
  }
};

SinusoidBank make_bank(std::mt19937_64& rng, int channels, double max_freq,
                       double amplitude) {
  SinusoidBank bank;
  bank.channels.resize(channels);
  for (int c = 0; c < channels; ++c) {
    bank.channels[c].resize(kSinusoids);
    for (SinusoidBank::Component& comp : bank.channels[c]) {
      const double mag = (0.25 + 0.75 * uniform_unit(rng)) * max_freq;
      const double ang = 2.0 * std::numbers::pi * uniform_unit(rng);
      comp.fx = mag * std::cos(ang);
      comp.fy = mag * std::sin(ang);
      comp.phase = 2.0 * std::numbers::pi * uniform_unit(rng);
      comp.amp = amplitude;
    }
  }
  return bank;
}

// Fronto-parallel textured surface. Extent is in camera-1 coordinates at the
// surface depth; the background plane is unbounded.
struct Surface {
  double z = 0.0;
  bool bounded = false;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  SinusoidBank image_tex;    // 3 channels
  SinusoidBank feature_tex;  // feature_channels

  bool contains(double x, double y) const {
    return !bounded || (x >= x0 && x <= x1 && y >= y0 && y <= y1);
  }
};

struct Hit {
  int surface = -1;
  Eigen::Vector3d point_cam1 = Eigen::Vector3d::Zero();  // on the surface
  double local_depth = 0.0;  // z in the casting camera's frame
};

// Nearest surface along the ray through a (possibly fractional) pixel of the
// given view. cam1_from_view maps the view's camera frame into camera 1.
Hit cast_ray(const std::vector<Surface>& surfaces, const CameraIntrinsics& K,
             const RigidTransform& cam1_from_view, double px, double py) {
  const Eigen::Vector3d dir((px - K.cx) / K.fx, (py - K.cy) / K.fy, 1.0);
  const Eigen::Matrix3d& R = cam1_from_view.rotation;
  const Eigen::Vector3d& t = cam1_from_view.translation;

  Hit best;
  for (size_t i = 0; i < surfaces.size(); ++i) {
    const Surface& s = surfaces[i];
    // Solve z-component of R (lambda dir) + t = s.z for the ray parameter.
    const double dz = R.row(2).dot(dir);
    if (std::abs(dz) < 1e-12) continue;
    const double lambda = (s.z - t.z()) / dz;
    if (!(lambda > 0)) continue;
    const Eigen::Vector3d p1 = R * (lambda * dir) + t;
    if (!s.contains(p1.x(), p1.y())) continue;
    if (best.surface < 0 || lambda < best.local_depth) {
      best.surface = int(i);
      best.point_cam1 = p1;
      best.local_depth = lambda;
    }
  }
  return best;
}

double texture_scale(const CameraIntrinsics& K, double z) { return K.fx / z; }

SyntheticScene render_scene(const PlaneSceneConfig& cfg,
                            std::vector<Surface>& surfaces) {
  const int w = cfg.width, h = cfg.height;
  const CameraIntrinsics K(cfg.focal, cfg.focal, (w - 1) / 2.0, (h - 1) / 2.0,
                           w, h);
  const RigidTransform T_12 = RigidTransform::from_parts(
      Eigen::Matrix3d::Identity(), {-cfg.baseline, 0.0, 0.0});
  const RigidTransform cam1_from_view2 = T_12.inverse();
  const RigidTransform identity;

  SyntheticScene scene;
  scene.seed = cfg.seed;
  scene.intrinsics = K;
  scene.view1_to_view2 = T_12;
  scene.image_a = ImageRaster(w, h, 3, 0.0);
  scene.image_b = ImageRaster(w, h, 3, 0.0);
  scene.features_a = FeatureMap(w, h, cfg.feature_channels, 0.0);
  scene.features_b = FeatureMap(w, h, cfg.feature_channels, 0.0);
  scene.depth_a = DepthMap(w, h, 0.0, true);
  scene.depth_b = DepthMap(w, h, 0.0, true);
  scene.flow_gt = FlowField(w, h, 2, 0.0);
  scene.occlusion_gt = BinaryMask(w, h, 1, 0);
  scene.surface_a = BinaryMask(w, h, 1, 0);

  for (int view = 0; view < 2; ++view) {
    const RigidTransform& to_cam1 = view == 0 ? identity : cam1_from_view2;
    ImageRaster& image = view == 0 ? scene.image_a : scene.image_b;
    FeatureMap& features = view == 0 ? scene.features_a : scene.features_b;
    DepthMap& depth = view == 0 ? scene.depth_a : scene.depth_b;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const Hit hit = cast_ray(surfaces, K, to_cam1, x, y);
        if (hit.surface < 0)
          throw std::runtime_error("synthetic scene: ray misses all surfaces");
        const Surface& s = surfaces[hit.surface];
        const double scale = texture_scale(K, s.z);
        const double qx = hit.point_cam1.x() * scale;
        const double qy = hit.point_cam1.y() * scale;
        depth.data.at(x, y) = hit.local_depth;
        // Image amplitudes sum to 1, so values stay inside [0, 1].
        for (int c = 0; c < 3; ++c)
          image.at(x, y, c) = 0.5 + 0.5 * s.image_tex.eval(c, qx, qy);
        // Constant-norm descriptor: a pure function of the surface point, so
        // corresponding pixels in both views still agree exactly.
        double norm2 = 0.0;
        for (int c = 0; c < cfg.feature_channels; ++c) {
          const double v = s.feature_tex.eval(c, qx, qy);
          features.at(x, y, c) = v;
          norm2 += v * v;
        }
        if (norm2 > 0.0) {
          const double gain =
              kFeatureAmp * std::sqrt(double(cfg.feature_channels) / norm2);
          for (int c = 0; c < cfg.feature_channels; ++c)
            features.at(x, y, c) *= gain;
        }
        if (view == 0) scene.surface_a.at(x, y) = std::uint8_t(hit.surface);
      }
  }

  // Analytic flow and visibility for view 1.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Hit hit = cast_ray(surfaces, K, identity, x, y);
      const Eigen::Vector3d p2 = transform_point(hit.point_cam1, T_12);
      if (!(p2.z() > 0)) continue;  // flow stays 0, occluded
      const Eigen::Vector2d u2 = project(p2, K);
      scene.flow_gt.at(x, y, 0) = u2.x() - x;
      scene.flow_gt.at(x, y, 1) = u2.y() - y;
      if (u2.x() < 0 || u2.x() > w - 1 || u2.y() < 0 || u2.y() > h - 1)
        continue;
      const Hit hit2 = cast_ray(surfaces, K, cam1_from_view2, u2.x(), u2.y());
      if (p2.z() <= hit2.local_depth + kZTolerance)
        scene.occlusion_gt.at(x, y) = 1;
    }

  // Construction check: visible pixels reproject through flow_gt exactly.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!scene.occlusion_gt.at(x, y)) continue;
      const Hit hit = cast_ray(surfaces, K, identity, x, y);
      const Eigen::Vector2d u2 =
          project(transform_point(hit.point_cam1, T_12), K);
      if (std::abs(u2.x() - (x + scene.flow_gt.at(x, y, 0))) > 1e-6 ||
          std::abs(u2.y() - (y + scene.flow_gt.at(x, y, 1))) > 1e-6)
        throw std::runtime_error("synthetic scene: flow consistency check failed");
    }
  return scene;
}

std::vector<Surface> plane_surfaces(const PlaneSceneConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<Surface> surfaces(1);
  Surface& bg = surfaces[0];
  bg.z = cfg.plane_depth;
  bg.bounded = false;
  bg.image_tex = make_bank(rng, 3, cfg.image_max_freq, 1.0 / kSinusoids);
  bg.feature_tex =
      make_bank(rng, cfg.feature_channels, cfg.feature_max_freq, 1.0);
  return surfaces;
}

std::vector<Surface> occluder_surfaces(const OccluderSceneConfig& cfg) {
  const PlaneSceneConfig& base = cfg.base;
  std::vector<Surface> surfaces = plane_surfaces(base);
  if (cfg.fg_x1 < cfg.fg_x0 || cfg.fg_y1 < cfg.fg_y0)
    return surfaces;  // empty box degrades to the plane scene
  if (cfg.fg_x0 <= 0 && cfg.fg_y0 <= 0 && cfg.fg_x1 >= base.width - 1 &&
      cfg.fg_y1 >= base.height - 1)
    throw std::invalid_argument(
        "occluder scene: foreground covers the entire frame");
  if (!(cfg.fg_depth > 0) || !(cfg.fg_depth < base.plane_depth))
    throw std::invalid_argument(
        "occluder scene: foreground must sit in front of the background");

  const CameraIntrinsics K(base.focal, base.focal, (base.width - 1) / 2.0,
                           (base.height - 1) / 2.0, base.width, base.height);
  std::mt19937_64 rng(base.seed ^ 0x9e3779b97f4a7c15ull);
  Surface fg;
  fg.z = cfg.fg_depth;
  fg.bounded = true;
  fg.x0 = (cfg.fg_x0 - K.cx) / K.fx * cfg.fg_depth;
  fg.x1 = (cfg.fg_x1 - K.cx) / K.fx * cfg.fg_depth;
  fg.y0 = (cfg.fg_y0 - K.cy) / K.fy * cfg.fg_depth;
  fg.y1 = (cfg.fg_y1 - K.cy) / K.fy * cfg.fg_depth;
  fg.image_tex = make_bank(rng, 3, base.image_max_freq, 1.0 / kSinusoids);
  fg.feature_tex =
      make_bank(rng, base.feature_channels, base.feature_max_freq, 1.0);
  surfaces.push_back(fg);
  return surfaces;
}

FlowField backward_flow_impl(const PlaneSceneConfig& base,
                             std::vector<Surface>& surfaces) {
  const int w = base.width, h = base.height;
  const CameraIntrinsics K(base.focal, base.focal, (w - 1) / 2.0, (h - 1) / 2.0,
                           w, h);
  const RigidTransform T_12 = RigidTransform::from_parts(
      Eigen::Matrix3d::Identity(), {-base.baseline, 0.0, 0.0});
  const RigidTransform cam1_from_view2 = T_12.inverse();

  FlowField flow(w, h, 2, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Hit hit = cast_ray(surfaces, K, cam1_from_view2, x, y);
      if (hit.surface < 0 || !(hit.point_cam1.z() > 0)) continue;
      const Eigen::Vector2d u1 = project(hit.point_cam1, K);
      flow.at(x, y, 0) = u1.x() - x;
      flow.at(x, y, 1) = u1.y() - y;
    }
  return flow;
}

}  // namespace

SyntheticScene make_plane_scene(const PlaneSceneConfig& cfg) {
  std::vector<Surface> surfaces = plane_surfaces(cfg);
  return render_scene(cfg, surfaces);
}

SyntheticScene make_occluder_scene(const OccluderSceneConfig& cfg) {
  std::vector<Surface> surfaces = occluder_surfaces(cfg);
  return render_scene(cfg.base, surfaces);
}

FlowField backward_flow(const PlaneSceneConfig& cfg) {
  std::vector<Surface> surfaces = plane_surfaces(cfg);
  return backward_flow_impl(cfg, surfaces);
}

FlowField backward_flow(const OccluderSceneConfig& cfg) {
  std::vector<Surface> surfaces = occluder_surfaces(cfg);
  return backward_flow_impl(cfg.base, surfaces);
}

BinaryMask baseline_fb_consistency_mask(const FlowField& forward,
                                        const FlowField& backward,
                                        double alpha1, double alpha2) {
  if (!forward.same_shape(backward) || forward.channels() != 2)
    throw std::invalid_argument("fb mask: flows must share an H x W x 2 shape");
  const int w = forward.width(), h = forward.height();
  BinaryMask mask(w, h, 1, 0);
  double sample[2];
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double fx = forward.at(x, y, 0);
      const double fy = forward.at(x, y, 1);
      if (!bilinear_sample(backward, x + fx, y + fy, sample)) continue;
      const double sum2 = (fx + sample[0]) * (fx + sample[0]) +
                          (fy + sample[1]) * (fy + sample[1]);
      const double mag2 = fx * fx + fy * fy +
                          sample[0] * sample[0] + sample[1] * sample[1];
      if (sum2 < alpha1 * mag2 + alpha2) mask.at(x, y) = 1;
    }
  return mask;
}

BinaryMask baseline_depthflow_mask(const DepthMap& depth,
                                   const CameraIntrinsics& K,
                                   const RigidTransform& T,
                                   const FlowField& flow,
                                   double threshold_px) {
  require_same_extent(depth, flow, "depth vs flow");
  if (flow.channels() != 2)
    throw std::invalid_argument("depth-flow mask: flow must have 2 channels");
  const int w = depth.width(), h = depth.height();
  BinaryMask mask(w, h, 1, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(x, y)) continue;
      const Eigen::Vector3d p =
          unproject({double(x), double(y)}, depth.data.at(x, y), K);
      const Eigen::Vector3d q = transform_point(p, T);
      if (!(q.z() > 0)) continue;
      const Eigen::Vector2d u2 = project(q, K);
      const double dx = flow.at(x, y, 0) - (u2.x() - x);
      const double dy = flow.at(x, y, 1) - (u2.y() - y);
      if (std::sqrt(dx * dx + dy * dy) <= threshold_px) mask.at(x, y) = 1;
    }
  return mask;
}

DepthMap corrupt_depth(const DepthMap& depth, double amplitude,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double mag = 0.02 + 0.04 * uniform_unit(rng);  // cycles per pixel
  const double ang = 2.0 * std::numbers::pi * uniform_unit(rng);
  const double kx = mag * std::cos(ang);
  const double ky = mag * std::sin(ang);
  const double phase = 2.0 * std::numbers::pi * uniform_unit(rng);

  DepthMap out = depth;
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      const double ripple =
          std::sin(2.0 * std::numbers::pi * (kx * x + ky * y) + phase);
      out.data.at(x, y) = depth.data.at(x, y) * (1.0 + amplitude * ripple);
    }
  return out;
}

}  // namespace flowdepth
