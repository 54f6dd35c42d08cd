#include "flowdepth/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flowdepth/io.hpp"
#include "flowdepth/sampling.hpp"

namespace flowdepth {

namespace {

constexpr double kLumaR = 0.299, kLumaG = 0.587, kLumaB = 0.114;
constexpr double kSoftSign = 0.81;     // soft-sign stabilizer
constexpr double kHamming = 0.1;       // soft Hamming saturation
constexpr double kCharbonnier = 1e-6;  // squared Charbonnier offset
constexpr int kPatch = 3;              // 7x7 patch half-width

Raster<double> luma(const ImageRaster& image) {
  Raster<double> g(image.width(), image.height(), 1, 0.0);
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      g.at(x, y) = kLumaR * image.at(x, y, 0) + kLumaG * image.at(x, y, 1) +
                   kLumaB * image.at(x, y, 2);
  return g;
}

double soft_sign(double d) { return d / std::sqrt(d * d + kSoftSign); }

// d/dd of soft_sign.
double soft_sign_deriv(double d) {
  const double s = d * d + kSoftSign;
  return kSoftSign / (s * std::sqrt(s));
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_image(const ImageRaster& image, const char* what) {
  if (image.channels() != 3)
    throw std::invalid_argument(std::string(what) + ": expected 3 channels");
}

}  // namespace

std::string LossReport::to_text() const {
  std::string out;
  out += "census=" + format_metric(census) + "\n";
  out += "smooth1=" + format_metric(smooth1) + "\n";
  out += "smooth2=" + format_metric(smooth2) + "\n";
  out += "consistency=" + format_metric(consistency) + "\n";
  out += "gcc=" + format_metric(gcc) + "\n";
  out += "rendering=" + format_metric(rendering) + "\n";
  out += "total=" + format_metric(total) + "\n";
  return out;
}

CensusResult census_loss(const ImageRaster& image_a,
                         const ImageRaster& image_b_warped,
                         const BinaryMask& valid) {
  check_image(image_a, "census_loss image_a");
  check_image(image_b_warped, "census_loss image_b");
  if (!image_a.same_shape(image_b_warped))
    throw std::invalid_argument("census_loss: image shapes differ");
  require_same_extent(image_a, valid, "images vs validity mask");

  const int w = image_a.width(), h = image_a.height();
  long long n_valid = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) n_valid += valid.at(x, y) ? 1 : 0;
  if (n_valid == 0)
    throw std::invalid_argument("census_loss: no valid pixels");

  const Raster<double> ga = luma(image_a);
  const Raster<double> gb = luma(image_b_warped);

  CensusResult res;
  res.grad_a = ImageRaster(w, h, 3, 0.0);
  res.grad_b = ImageRaster(w, h, 3, 0.0);
  Raster<double> dga(w, h, 1, 0.0);  // dL/d(luma_a)
  Raster<double> dgb(w, h, 1, 0.0);

  const double inv_n = 1.0 / double(n_valid);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!valid.at(x, y)) continue;
      double hamming = 0.0;
      for (int dy = -kPatch; dy <= kPatch; ++dy) {
        const int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -kPatch; dx <= kPatch; ++dx) {
          const int nx = x + dx;
          if (nx < 0 || nx >= w) continue;
          const double ta = soft_sign(ga.at(x, y) - ga.at(nx, ny));
          const double tb = soft_sign(gb.at(x, y) - gb.at(nx, ny));
          const double d = (ta - tb) * (ta - tb);
          hamming += d / (kHamming + d);
        }
      }
      const double charb = std::sqrt(hamming * hamming + kCharbonnier);
      res.value += charb * inv_n;

      // Chain: charb -> hamming -> per-neighbor soft distance -> transforms.
      const double dcharb = hamming / charb * inv_n;
      for (int dy = -kPatch; dy <= kPatch; ++dy) {
        const int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -kPatch; dx <= kPatch; ++dx) {
          const int nx = x + dx;
          if (nx < 0 || nx >= w) continue;
          const double da = ga.at(x, y) - ga.at(nx, ny);
          const double db = gb.at(x, y) - gb.at(nx, ny);
          const double ta = soft_sign(da);
          const double tb = soft_sign(db);
          const double diff = ta - tb;
          const double d = diff * diff;
          const double denom = kHamming + d;
          const double ddn = kHamming / (denom * denom);  // d(d/(0.1+d))/dd
          const double common = dcharb * ddn * 2.0 * diff;
          const double wa = common * soft_sign_deriv(da);
          const double wb = -common * soft_sign_deriv(db);
          dga.at(x, y) += wa;
          dga.at(nx, ny) -= wa;
          dgb.at(x, y) += wb;
          dgb.at(nx, ny) -= wb;
        }
      }
    }

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      res.grad_a.at(x, y, 0) = dga.at(x, y) * kLumaR;
      res.grad_a.at(x, y, 1) = dga.at(x, y) * kLumaG;
      res.grad_a.at(x, y, 2) = dga.at(x, y) * kLumaB;
      res.grad_b.at(x, y, 0) = dgb.at(x, y) * kLumaR;
      res.grad_b.at(x, y, 1) = dgb.at(x, y) * kLumaG;
      res.grad_b.at(x, y, 2) = dgb.at(x, y) * kLumaB;
    }
  return res;
}

SmoothnessResult smoothness_loss(const FlowField& flow,
                                 const ImageRaster& image, int order,
                                 double edge_weight) {
  if (flow.channels() != 2)
    throw std::invalid_argument("smoothness_loss: flow must have 2 channels");
  check_image(image, "smoothness_loss image");
  require_same_extent(flow, image, "flow vs image");
  if (order != 1 && order != 2)
    throw std::invalid_argument("smoothness_loss: order must be 1 or 2");
  const int w = flow.width(), h = flow.height();
  if (w < 3 || h < 3)
    throw std::invalid_argument("smoothness_loss: raster must be at least 3x3");

  SmoothnessResult res;
  res.grad_flow = FlowField(w, h, 2, 0.0);

  // Edge weight from the forward image difference along the axis.
  auto axis_weight = [&](int x, int y, int ax, int ay) {
    double mean = 0.0;
    for (int c = 0; c < 3; ++c)
      mean += std::abs(image.at(x + ax, y + ay, c) - image.at(x, y, c));
    return std::exp(-edge_weight * (mean / 3.0));
  };

  for (int axis = 0; axis < 2; ++axis) {
    const int ax = axis == 0 ? 1 : 0;
    const int ay = axis == 0 ? 0 : 1;
    const int span = order;  // stencil reach beyond the base pixel
    const int nx = w - ax * span;
    const int ny = h - ay * span;
    const double inv_n = 1.0 / (double(nx) * ny);
    double axis_sum = 0.0;
    for (int y = 0; y + ay * span < h; ++y)
      for (int x = 0; x + ax * span < w; ++x) {
        const double wgt = axis_weight(x, y, ax, ay);
        for (int c = 0; c < 2; ++c) {
          double d;
          if (order == 1) {
            d = flow.at(x + ax, y + ay, c) - flow.at(x, y, c);
          } else {
            d = flow.at(x + 2 * ax, y + 2 * ay, c) -
                2.0 * flow.at(x + ax, y + ay, c) + flow.at(x, y, c);
          }
          axis_sum += std::abs(d) * wgt;
          const double g = sign_of(d) * wgt * inv_n;
          if (order == 1) {
            res.grad_flow.at(x + ax, y + ay, c) += g;
            res.grad_flow.at(x, y, c) -= g;
          } else {
            res.grad_flow.at(x + 2 * ax, y + 2 * ay, c) += g;
            res.grad_flow.at(x + ax, y + ay, c) -= 2.0 * g;
            res.grad_flow.at(x, y, c) += g;
          }
        }
      }
    res.value += axis_sum * inv_n;
  }
  return res;
}

ConsistencyResult multiview_consistency_loss(const DepthMap& d_ref,
                                             const DepthMap& d_tgt,
                                             const FlowField& flow,
                                             const ProbabilityMap& m_flow) {
  require_same_extent(d_ref, flow, "reference depth vs flow");
  require_same_extent(d_ref, m_flow, "reference depth vs mask");
  if (flow.channels() != 2)
    throw std::invalid_argument("consistency: flow must have 2 channels");

  const int w = d_ref.width(), h = d_ref.height();
  struct Term {
    int x, y;
    double sx, sy;
    double diff;
  };
  std::vector<Term> terms;
  terms.reserve(size_t(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double sx = x + flow.at(x, y, 0);
      const double sy = y + flow.at(x, y, 1);
      const ScalarSample s = bilinear_sample_scalar(d_tgt.data, sx, sy);
      if (!s.in_bounds) continue;
      terms.push_back({x, y, sx, sy, d_ref.data.at(x, y) - s.value});
    }
  if (terms.empty())
    throw std::invalid_argument("consistency: every sample is out of bounds");

  ConsistencyResult res;
  res.grad_ref = Raster<double>(w, h, 1, 0.0);
  res.grad_tgt = Raster<double>(w, h, 1, 0.0);
  res.grad_flow = FlowField(w, h, 2, 0.0);
  const double inv_n = 1.0 / double(terms.size());
  for (const Term& t : terms) {
    const double m = m_flow.at(t.x, t.y);
    res.value += m * std::abs(t.diff) * inv_n;

    const double g = m * sign_of(t.diff) * inv_n;
    res.grad_ref.at(t.x, t.y) += g;

    const int x0 = int(std::floor(t.sx));
    const int y0 = int(std::floor(t.sy));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wx = t.sx - x0;
    const double wy = t.sy - y0;
    res.grad_tgt.at(x0, y0) -= g * (1.0 - wx) * (1.0 - wy);
    res.grad_tgt.at(x1, y0) -= g * wx * (1.0 - wy);
    res.grad_tgt.at(x0, y1) -= g * (1.0 - wx) * wy;
    res.grad_tgt.at(x1, y1) -= g * wx * wy;

    // Spatial derivative of the bilinear surface at the sample point.
    const double v00 = d_tgt.data.at(x0, y0), v10 = d_tgt.data.at(x1, y0);
    const double v01 = d_tgt.data.at(x0, y1), v11 = d_tgt.data.at(x1, y1);
    const double dvdx = (1.0 - wy) * (v10 - v00) + wy * (v11 - v01);
    const double dvdy = (1.0 - wx) * (v01 - v00) + wx * (v11 - v10);
    res.grad_flow.at(t.x, t.y, 0) = -g * dvdx;
    res.grad_flow.at(t.x, t.y, 1) = -g * dvdy;
  }
  return res;
}

RenderingResult rendering_loss(const std::vector<ImageRaster>& renders,
                               const std::vector<ImageRaster>& targets,
                               double lambda_lpips) {
  if (renders.size() != targets.size())
    throw std::invalid_argument("rendering_loss: pair count mismatch");
  if (renders.empty())
    throw std::invalid_argument("rendering_loss: no view pairs");

  RenderingResult res;
  res.grad_renders.reserve(renders.size());
  for (size_t m = 0; m < renders.size(); ++m) {
    const ImageRaster& r = renders[m];
    const ImageRaster& t = targets[m];
    check_image(r, "rendering_loss render");
    if (!r.same_shape(t))
      throw std::invalid_argument("rendering_loss: pair shapes differ");
    const double inv_n = 1.0 / (double(r.width()) * r.height() * 3.0);
    ImageRaster grad(r.width(), r.height(), 3, 0.0);
    double mse = 0.0;
    for (int y = 0; y < r.height(); ++y)
      for (int x = 0; x < r.width(); ++x)
        for (int c = 0; c < 3; ++c) {
          const double d = r.at(x, y, c) - t.at(x, y, c);
          mse += d * d * inv_n;
          grad.at(x, y, c) = 2.0 * d * inv_n;
        }
    res.value += mse;
    res.grad_renders.push_back(std::move(grad));
  }
  // Perceptual slot: identically zero surrogate, kept in the functional form.
  res.value += lambda_lpips * 0.0;
  return res;
}

LossReport total_loss(double census, double smooth1, double smooth2,
                      double consistency, double rendering,
                      const LossWeights& weights, double gcc) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v))
      throw std::invalid_argument(std::string("total_loss: non-finite term: ") +
                                  name);
  };
  check(census, "census");
  check(smooth1, "smooth1");
  check(smooth2, "smooth2");
  check(consistency, "consistency");
  check(rendering, "rendering");
  check(gcc, "gcc");

  LossReport rep;
  rep.census = census;
  rep.smooth1 = smooth1;
  rep.smooth2 = smooth2;
  rep.consistency = consistency;
  rep.gcc = gcc;
  rep.rendering = rendering;
  rep.total = weights.lambda_s1 * smooth1 + weights.lambda_s2 * smooth2 +
              weights.lambda_c * census + weights.lambda_g * gcc +
              weights.lambda_m * consistency + rendering;
  return rep;
}

}  // namespace flowdepth
