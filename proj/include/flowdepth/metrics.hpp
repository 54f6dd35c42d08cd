#pragma once

#include "flowdepth/raster.hpp"

namespace flowdepth {

// 10 log10(peak^2 / MSE) over all pixels and channels; identical inputs give
// +infinity.
double psnr(const ImageRaster& a, const ImageRaster& b, double peak = 1.0);

// Single-scale SSIM, 11x11 Gaussian window sigma 1.5, C1 = (0.01 peak)^2,
// C2 = (0.03 peak)^2, computed where the window fits entirely, mean over
// channels then pixels. Requires H, W >= 11.
double ssim(const ImageRaster& a, const ImageRaster& b, double peak = 1.0);

// Depth metrics over jointly valid pixels: mean |pred - gt| / gt and the
// fraction with max(pred/gt, gt/pred) < 1.25 (strict).
struct DepthMetricReport {
  double abs_rel = 0.0;
  double delta1 = 0.0;
  long long pixel_count = 0;
};
DepthMetricReport depth_metrics(const DepthMap& pred, const DepthMap& gt);

}  // namespace flowdepth
