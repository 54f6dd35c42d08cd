#pragma once

#include <cstdint>
#include <vector>

#include "flowdepth/raster.hpp"

namespace flowdepth {

// Two-layer residual correction head: 3x3 conv (3 -> hidden), ReLU,
// 3x3 conv (hidden -> 1), zero padding 1. Input channels are the hybrid
// depth, the flow-triangulated depth, and the flow probability mask, with
// both depths divided by the scene's median hybrid depth; the predicted
// residual is scaled back by the same factor.
struct ResidualRefiner {
  int hidden = 0;
  std::vector<double> conv1_w;  // [hidden][3][3][3], (out, in, ky, kx)
  std::vector<double> conv1_b;  // [hidden]
  std::vector<double> conv2_w;  // [hidden][3][3], (in, ky, kx)
  double conv2_b = 0.0;

  ResidualRefiner() = default;
  explicit ResidualRefiner(int hidden_channels);  // zero parameters

  bool finite() const;
  size_t parameter_count() const;
};

// Fan-in-scaled uniform initialization in [-1/sqrt(9 C_in), 1/sqrt(9 C_in)]
// per layer, deterministic in the seed.
ResidualRefiner seeded_refiner(int hidden_channels, std::uint64_t seed);

// Raw conv stack evaluation on an H x W x 3 input.
struct RefinerActivations {
  Raster<double> hidden_pre;  // H x W x hidden, pre-ReLU
  Raster<double> output;      // H x W x 1
};
RefinerActivations refiner_forward(const ResidualRefiner& refiner,
                                   const Raster<double>& input3);

// D_refine = d_hyb + s * net([d_hyb/s, d_flow/s, m_flow]) with
// s = scale > 0 ? scale : median(d_hyb). Invalid d_flow pixels enter as 0
// with m_flow forced to 0 there. Requires d_hyb valid everywhere; output
// validity copies d_hyb.
DepthMap refine_depth(const ResidualRefiner& refiner, const DepthMap& d_hyb,
                      const DepthMap& d_flow, const ProbabilityMap& m_flow,
                      double scale = 0.0);

// Exact analytic gradients of a scalar loss with respect to every parameter,
// given dL/d(output) on the same H x W grid as input3.
struct RefinerGradients {
  std::vector<double> conv1_w;
  std::vector<double> conv1_b;
  std::vector<double> conv2_w;
  double conv2_b = 0.0;
};
RefinerGradients refiner_gradients(const ResidualRefiner& refiner,
                                   const Raster<double>& input3,
                                   const Raster<double>& upstream);

struct RefinerSample {
  DepthMap d_hyb;
  DepthMap d_flow;
  ProbabilityMap m_flow;
  DepthMap d_gt;
};

// Full-batch gradient descent on mean squared depth error, starting from the
// passed refiner. Deterministic; the loss trace holds the pre-update loss of
// every step plus the final loss. Non-finite loss raises with the step index.
struct FitResult {
  ResidualRefiner refiner;
  std::vector<double> loss_trace;
};
FitResult fit_refiner(const ResidualRefiner& initial,
                      const std::vector<RefinerSample>& dataset, int steps,
                      double learning_rate);

// Mean squared / mean absolute depth error of a refiner over a dataset.
double refiner_mse(const ResidualRefiner& refiner,
                   const std::vector<RefinerSample>& dataset);
double refiner_mae(const ResidualRefiner& refiner,
                   const std::vector<RefinerSample>& dataset);

}  // namespace flowdepth
