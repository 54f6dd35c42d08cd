#include "flowdepth/pipeline.hpp"

#include <stdexcept>

namespace flowdepth {

DepthPipelineResult run_depth_pipeline(
    const FeatureMap& features_a, const FeatureMap& features_b,
    const DepthMap& d_hyb, const CameraIntrinsics& K, const RigidTransform& T,
    const MatchingConfig& matching_cfg, const OcclusionConfig& occlusion_cfg,
    const TriangulationConfig& triangulation_cfg,
    const ResidualRefiner& refiner, const FlowField* flow_override) {
  DepthPipelineResult out;
  out.matching = compute_matching(features_a, features_b, d_hyb, matching_cfg);

  const WarpedFeatures warped = warp_features(features_b, d_hyb, K, T);
  out.m_occ = occlusion_mask(features_a, warped.features, warped.in_bounds,
                             occlusion_cfg);
  out.m_flow = flow_probability_mask(out.m_occ, out.matching.confidence);

  const FlowField& flow = flow_override ? *flow_override : out.matching.flow;
  if (flow_override) require_same_extent(*flow_override, d_hyb, "flow override");
  out.d_flow = flow_depth_map(flow, K, T, triangulation_cfg);

  out.d_refine = refine_depth(refiner, d_hyb, out.d_flow, out.m_flow);
  return out;
}

std::vector<RefinerSample> make_refiner_benchmark(std::uint64_t seed,
                                                  int scene_count, int extent) {
  if (scene_count < 1 || extent < 16)
    throw std::invalid_argument("refiner benchmark: too small");
  std::vector<RefinerSample> dataset;
  dataset.reserve(scene_count);

  MatchingConfig matching_cfg;
  matching_cfg.r_min = 8;  // constant radius covering the scene disparities
  matching_cfg.r_max = 8;
  const OcclusionConfig occlusion_cfg;
  const TriangulationConfig triangulation_cfg;

  for (int i = 0; i < scene_count; ++i) {
    PlaneSceneConfig cfg;
    cfg.width = extent;
    cfg.height = extent;
    cfg.plane_depth = 1.6 + 0.4 * i;  // disparities stay inside the radius
    cfg.seed = seed + std::uint64_t(i) * 0x9e3779b97f4a7c15ull;
    const SyntheticScene scene = make_plane_scene(cfg);

    RefinerSample sample;
    sample.d_gt = scene.depth_a;
    sample.d_hyb = corrupt_depth(scene.depth_a, 0.1, cfg.seed ^ 0x5bf03595ull);

    const MatchingResult matching = compute_matching(
        scene.features_a, scene.features_b, sample.d_hyb, matching_cfg);
    const WarpedFeatures warped = warp_features(
        scene.features_b, sample.d_hyb, scene.intrinsics, scene.view1_to_view2);
    const BinaryMask m_occ = occlusion_mask(scene.features_a, warped.features,
                                            warped.in_bounds, occlusion_cfg);
    sample.m_flow = flow_probability_mask(m_occ, matching.confidence);
    sample.d_flow = flow_depth_map(scene.flow_gt, scene.intrinsics,
                                   scene.view1_to_view2, triangulation_cfg);
    dataset.push_back(std::move(sample));
  }
  return dataset;
}

}  // namespace flowdepth
