#pragma once

#include <cstdint>
#include <vector>

#include "flowdepth/fusion.hpp"
#include "flowdepth/matching.hpp"
#include "flowdepth/occlusion.hpp"
#include "flowdepth/raster.hpp"
#include "flowdepth/synth.hpp"
#include "flowdepth/triangulation.hpp"

namespace flowdepth {

// Matching -> occlusion gating -> triangulation -> residual fusion.
// flow_override, when non-null, replaces the matching flow for triangulation
// (the matching distribution still provides confidence and masks).
struct DepthPipelineResult {
  MatchingResult matching;
  BinaryMask m_occ;
  ProbabilityMap m_flow;
  DepthMap d_flow;
  DepthMap d_refine;
};
DepthPipelineResult run_depth_pipeline(
    const FeatureMap& features_a, const FeatureMap& features_b,
    const DepthMap& d_hyb, const CameraIntrinsics& K, const RigidTransform& T,
    const MatchingConfig& matching_cfg, const OcclusionConfig& occlusion_cfg,
    const TriangulationConfig& triangulation_cfg,
    const ResidualRefiner& refiner, const FlowField* flow_override = nullptr);

// Structured-error fitting benchmark: plane scenes at varied depths, hybrid
// depth corrupted by a smooth 10% ripple, flow depth triangulated from the
// analytic flow, masks from the real matching + occlusion path. Deterministic
// in the seed.
std::vector<RefinerSample> make_refiner_benchmark(std::uint64_t seed,
                                                  int scene_count = 3,
                                                  int extent = 48);

}  // namespace flowdepth
