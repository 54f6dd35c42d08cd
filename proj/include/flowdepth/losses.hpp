#pragma once

#include <string>
#include <vector>

#include "flowdepth/raster.hpp"

namespace flowdepth {

struct LossWeights {
  double lambda_s1 = 0.0025;   // first-order smoothness
  double lambda_s2 = 0.0025;   // second-order smoothness
  double lambda_c = 0.1;       // census
  double lambda_g = 0.1;       // geometry-consistency slot
  double lambda_m = 0.1;       // multiview depth consistency
  double lambda_lpips = 0.05;  // perceptual slot inside the rendering term
};

struct LossReport {
  double census = 0.0;
  double smooth1 = 0.0;
  double smooth2 = 0.0;
  double consistency = 0.0;
  double gcc = 0.0;
  double rendering = 0.0;
  double total = 0.0;

  std::string to_text() const;  // flat key=value block
};

// Soft census: 7x7 patches of the luma images (0.299 R + 0.587 G + 0.114 B),
// per-neighbor soft sign (p_center - p_neighbor) / sqrt((.)^2 + 0.81), soft
// Hamming distance d/(0.1 + d) summed over the patch, Charbonnier
// sqrt(x^2 + 1e-6), averaged over valid pixels. Neighbors outside the raster
// are omitted from both transforms. Invariant to a shared additive bias.
struct CensusResult {
  double value = 0.0;
  ImageRaster grad_a;  // dL/d(image_a)
  ImageRaster grad_b;  // dL/d(image_b_warped)
};
CensusResult census_loss(const ImageRaster& image_a,
                         const ImageRaster& image_b_warped,
                         const BinaryMask& valid);

// Edge-aware smoothness of order 1 or 2: per axis, the mean over the
// forward-difference domain of sum_channels |d flow| * exp(-edge_weight *
// mean_channels |d image|), borders omitted, summed over axes. Order 2 uses
// the forward second difference with the same per-axis image weight.
struct SmoothnessResult {
  double value = 0.0;
  FlowField grad_flow;
};
SmoothnessResult smoothness_loss(const FlowField& flow,
                                 const ImageRaster& image, int order,
                                 double edge_weight = 150.0);

// Mean over in-bounds samples of m_flow(u) * |d_ref(u) - d_tgt(u + flow(u))|
// with the target depth sampled bilinearly. Out-of-bounds samples are
// excluded from the mean; throws if every sample is out of bounds.
struct ConsistencyResult {
  double value = 0.0;
  Raster<double> grad_ref;   // dL/d(d_ref)
  Raster<double> grad_tgt;   // dL/d(d_tgt)
  FlowField grad_flow;       // dL/d(flow), piecewise within bilinear cells
};
ConsistencyResult multiview_consistency_loss(const DepthMap& d_ref,
                                             const DepthMap& d_tgt,
                                             const FlowField& flow,
                                             const ProbabilityMap& m_flow);

// Sum over view pairs of mean squared error, plus lambda * 0 for the
// perceptual slot (identically zero in this artifact).
struct RenderingResult {
  double value = 0.0;
  std::vector<ImageRaster> grad_renders;
};
RenderingResult rendering_loss(const std::vector<ImageRaster>& renders,
                               const std::vector<ImageRaster>& targets,
                               double lambda_lpips = 0.05);

// total = l_s1 s1 + l_s2 s2 + l_c census + l_g gcc + l_m consistency
//         + rendering. The rendering term enters unweighted; the geometry
// consistency slot is a pluggable scalar defaulting to 0. Non-finite terms
// raise with the term name.
LossReport total_loss(double census, double smooth1, double smooth2,
                      double consistency, double rendering,
                      const LossWeights& weights, double gcc = 0.0);

}  // namespace flowdepth
