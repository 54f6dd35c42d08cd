#pragma once

#include <cstdint>

#include "flowdepth/camera.hpp"
#include "flowdepth/raster.hpp"

namespace flowdepth {

// Two-view scene with analytic ground truth. View 2 sits a lateral baseline
// to the right of view 1, so points obey p2 = p1 + (-baseline, 0, 0) and a
// surface at depth z carries flow -fx * baseline / z along x. Textures are
// band-limited noise (8 random-phase sinusoids per channel) sampled on the
// scene surfaces, so corresponding pixels see consistent descriptors.
// Descriptors are rescaled to a constant per-pixel norm: matching scores are
// raw dot products, so a norm gradient across the texture would pull the
// correlation peak off the true correspondence, while constant-norm
// descriptors place it there exactly (Cauchy-Schwarz).
struct PlaneSceneConfig {
  int width = 64;
  int height = 64;
  double focal = 100.0;       // fx = fy, principal point centered
  double plane_depth = 2.0;   // meters
  double baseline = 0.1;      // meters, camera offset along +x
  int feature_channels = 16;
  double feature_max_freq = 0.15;  // cycles per view-1 pixel
  double image_max_freq = 0.015;   // low enough for sub-1e-3 resampling error
  std::uint64_t seed = 1;
};

struct OccluderSceneConfig {
  PlaneSceneConfig base;      // background plane
  double fg_depth = 1.25;     // meters, in front of the background
  int fg_x0 = 20, fg_y0 = 16; // foreground rectangle, view-1 pixel box,
  int fg_x1 = 43, fg_y1 = 47; // inclusive corners
};

struct SyntheticScene {
  ImageRaster image_a, image_b;
  FeatureMap features_a, features_b;
  DepthMap depth_a, depth_b;
  CameraIntrinsics intrinsics;
  RigidTransform view1_to_view2;
  FlowField flow_gt;        // view 1 -> view 2 reprojection displacement
  BinaryMask occlusion_gt;  // 1 where the view-1 pixel is visible in view 2
  BinaryMask surface_a;     // surface id per view-1 pixel (0 bg, 1 fg)
  std::uint64_t seed = 0;
};

SyntheticScene make_plane_scene(const PlaneSceneConfig& cfg);

// Background plane plus a nearer fronto-parallel rectangle. The occluded
// band has width fx * baseline * (1/fg_depth - 1/bg_depth) pixels. A
// foreground covering the whole frame is rejected; an empty box degrades to
// the plane scene.
SyntheticScene make_occluder_scene(const OccluderSceneConfig& cfg);

// Analytic view-2 -> view-1 flow for the same geometry.
FlowField backward_flow(const PlaneSceneConfig& cfg);
FlowField backward_flow(const OccluderSceneConfig& cfg);

// Forward-backward flow consistency gate: visible iff
// |f(u) + b(u + f(u))|^2 < alpha1 (|f(u)|^2 + |b(u + f(u))|^2) + alpha2,
// with the backward flow sampled bilinearly; out-of-hull samples are marked
// occluded.
BinaryMask baseline_fb_consistency_mask(const FlowField& forward,
                                        const FlowField& backward,
                                        double alpha1 = 0.01,
                                        double alpha2 = 0.5);

// Depth-flow consistency gate: visible iff the flow agrees with the rigid
// flow induced by depth + pose within threshold_px (euclidean). Invalid or
// behind-camera pixels are marked occluded.
BinaryMask baseline_depthflow_mask(const DepthMap& depth,
                                   const CameraIntrinsics& K,
                                   const RigidTransform& T,
                                   const FlowField& flow,
                                   double threshold_px = 1.0);

// Smooth multiplicative ripple: d * (1 + amplitude * sin(...)), seeded.
// Structured error model shared by the refiner benchmark and scene export.
DepthMap corrupt_depth(const DepthMap& depth, double amplitude,
                       std::uint64_t seed);

}  // namespace flowdepth
