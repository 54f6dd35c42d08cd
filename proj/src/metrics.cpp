#include "flowdepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace flowdepth {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void check_pair(const ImageRaster& a, const ImageRaster& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("image metric: shapes differ");
  if (a.channels() != 3)
    throw std::invalid_argument("image metric: expected 3 channels");
}

std::vector<double> gaussian_kernel() {
  std::vector<double> k(kWindow);
  const int half = kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - half;
    k[i] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

double psnr(const ImageRaster& a, const ImageRaster& b, double peak) {
  check_pair(a, b);
  if (!(peak > 0)) throw std::invalid_argument("psnr: peak must be positive");
  double mse = 0.0;
  const double inv_n = 1.0 / (double(a.width()) * a.height() * 3.0);
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double d = a.at(x, y, c) - b.at(x, y, c);
        mse += d * d * inv_n;
      }
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const ImageRaster& a, const ImageRaster& b, double peak) {
  check_pair(a, b);
  if (a.width() < kWindow || a.height() < kWindow)
    throw std::invalid_argument("ssim: raster smaller than the 11x11 window");
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const std::vector<double> kernel = gaussian_kernel();
  const int half = kWindow / 2;
  const int w = a.width(), h = a.height();

  double total = 0.0;
  long long count = 0;
  for (int y = half; y < h - half; ++y)
    for (int x = half; x < w - half; ++x) {
      double pixel_mean = 0.0;
      for (int c = 0; c < 3; ++c) {
        double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
        for (int dy = -half; dy <= half; ++dy)
          for (int dx = -half; dx <= half; ++dx) {
            const double wgt = kernel[dy + half] * kernel[dx + half];
            const double va = a.at(x + dx, y + dy, c);
            const double vb = b.at(x + dx, y + dy, c);
            mu_a += wgt * va;
            mu_b += wgt * vb;
            aa += wgt * va * va;
            bb += wgt * vb * vb;
            ab += wgt * va * vb;
          }
        const double var_a = aa - mu_a * mu_a;
        const double var_b = bb - mu_b * mu_b;
        const double cov = ab - mu_a * mu_b;
        const double s = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                         ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        pixel_mean += s / 3.0;
      }
      total += pixel_mean;
      ++count;
    }
  return total / double(count);
}

DepthMetricReport depth_metrics(const DepthMap& pred, const DepthMap& gt) {
  require_same_extent(pred, gt, "predicted vs ground-truth depth");
  DepthMetricReport rep;
  double rel_sum = 0.0;
  long long under = 0;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred.valid(x, y) || !gt.valid(x, y)) continue;
      const double p = pred.data.at(x, y);
      const double g = gt.data.at(x, y);
      rel_sum += std::abs(p - g) / g;
      if (std::max(p / g, g / p) < 1.25) ++under;
      ++rep.pixel_count;
    }
  if (rep.pixel_count == 0)
    throw std::invalid_argument("depth_metrics: no jointly valid pixels");
  rep.abs_rel = rel_sum / double(rep.pixel_count);
  rep.delta1 = double(under) / double(rep.pixel_count);
  return rep;
}

}  // namespace flowdepth
