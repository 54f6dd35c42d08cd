#include "flowdepth/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace flowdepth {

namespace {

constexpr int kKernel = 3;
constexpr int kInputChannels = 3;

double median_of(std::vector<double> v) {
  const size_t n = v.size();
  std::sort(v.begin(), v.end());
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median_hybrid_depth(const DepthMap& d_hyb) {
  return median_of(d_hyb.data.data());
}

// Uniform double in [0, 1) from the full 64-bit state, identical everywhere.
double uniform_unit(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// dL/d(output) -> parameter gradients and the normalized input stack for one
// sample, shared by fit_refiner and refiner_gradients.
void accumulate_gradients(const ResidualRefiner& refiner,
                          const Raster<double>& input3,
                          const RefinerActivations& acts,
                          const Raster<double>& upstream,
                          RefinerGradients& grads) {
  const int w = input3.width(), h = input3.height(), hc = refiner.hidden;

  // conv2: dL/dw2[j][ky][kx] = sum_u upstream(u) * relu(pre_j)(u + k - 1).
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double g = upstream.at(x, y);
      if (g == 0.0) continue;
      grads.conv2_b += g;
      for (int j = 0; j < hc; ++j)
        for (int ky = 0; ky < kKernel; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= w) continue;
            const double pre = acts.hidden_pre.at(sx, sy, j);
            if (pre > 0.0)
              grads.conv2_w[(j * kKernel + ky) * kKernel + kx] += g * pre;
          }
        }
    }

  // Backprop into the hidden layer: dL/dpost_j(u) = sum_k w2 * upstream,
  // masked by the ReLU derivative, then conv1 weight/bias gradients.
  Raster<double> dpre(w, h, hc, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double g = upstream.at(x, y);
      if (g == 0.0) continue;
      for (int j = 0; j < hc; ++j)
        for (int ky = 0; ky < kKernel; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= w) continue;
            if (acts.hidden_pre.at(sx, sy, j) > 0.0)
              dpre.at(sx, sy, j) +=
                  g * refiner.conv2_w[(j * kKernel + ky) * kKernel + kx];
          }
        }
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int j = 0; j < hc; ++j) {
        const double g = dpre.at(x, y, j);
        if (g == 0.0) continue;
        grads.conv1_b[j] += g;
        for (int i = 0; i < kInputChannels; ++i)
          for (int ky = 0; ky < kKernel; ++ky) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            for (int kx = 0; kx < kKernel; ++kx) {
              const int sx = x + kx - 1;
              if (sx < 0 || sx >= w) continue;
              grads.conv1_w[((j * kInputChannels + i) * kKernel + ky) * kKernel +
                            kx] += g * input3.at(sx, sy, i);
            }
          }
      }
}

Raster<double> normalized_input_stack(const DepthMap& d_hyb,
                                      const DepthMap& d_flow,
                                      const ProbabilityMap& m_flow,
                                      double scale) {
  const int w = d_hyb.width(), h = d_hyb.height();
  Raster<double> input3(w, h, 3, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      input3.at(x, y, 0) = d_hyb.data.at(x, y) / scale;
      if (d_flow.valid(x, y)) {
        input3.at(x, y, 1) = d_flow.data.at(x, y) / scale;
        input3.at(x, y, 2) = m_flow.at(x, y);
      }
    }
  return input3;
}

void check_refine_inputs(const ResidualRefiner& refiner, const DepthMap& d_hyb,
                         const DepthMap& d_flow, const ProbabilityMap& m_flow) {
  if (!refiner.finite())
    throw std::invalid_argument("refiner: non-finite parameters");
  require_same_extent(d_hyb, d_flow, "hybrid vs flow depth");
  require_same_extent(d_hyb, m_flow, "hybrid depth vs flow mask");
  for (int y = 0; y < d_hyb.height(); ++y)
    for (int x = 0; x < d_hyb.width(); ++x)
      if (!d_hyb.valid(x, y))
        throw std::invalid_argument("refine_depth: hybrid depth must be valid everywhere");
}

}  // namespace

ResidualRefiner::ResidualRefiner(int hidden_channels) : hidden(hidden_channels) {
  if (hidden_channels < 1)
    throw std::invalid_argument("refiner: hidden channel count must be positive");
  conv1_w.assign(size_t(hidden) * kInputChannels * kKernel * kKernel, 0.0);
  conv1_b.assign(size_t(hidden), 0.0);
  conv2_w.assign(size_t(hidden) * kKernel * kKernel, 0.0);
  conv2_b = 0.0;
}

bool ResidualRefiner::finite() const {
  return all_finite(conv1_w) && all_finite(conv1_b) && all_finite(conv2_w) &&
         std::isfinite(conv2_b);
}

size_t ResidualRefiner::parameter_count() const {
  return conv1_w.size() + conv1_b.size() + conv2_w.size() + 1;
}

ResidualRefiner seeded_refiner(int hidden_channels, std::uint64_t seed) {
  ResidualRefiner r(hidden_channels);
  std::mt19937_64 rng(seed);
  const double bound1 = 1.0 / std::sqrt(9.0 * kInputChannels);
  const double bound2 = 1.0 / std::sqrt(9.0 * hidden_channels);
  auto draw = [&rng](double bound) {
    return (2.0 * uniform_unit(rng) - 1.0) * bound;
  };
  for (double& v : r.conv1_w) v = draw(bound1);
  for (double& v : r.conv1_b) v = draw(bound1);
  for (double& v : r.conv2_w) v = draw(bound2);
  r.conv2_b = draw(bound2);
  return r;
}

RefinerActivations refiner_forward(const ResidualRefiner& refiner,
                                   const Raster<double>& input3) {
  if (input3.channels() != kInputChannels)
    throw std::invalid_argument("refiner_forward: input must have 3 channels");
  if (refiner.hidden < 1)
    throw std::invalid_argument("refiner_forward: uninitialized refiner");
  const int w = input3.width(), h = input3.height(), hc = refiner.hidden;

  RefinerActivations acts;
  acts.hidden_pre = Raster<double>(w, h, hc, 0.0);
  acts.output = Raster<double>(w, h, 1, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int j = 0; j < hc; ++j) {
        double acc = refiner.conv1_b[j];
        for (int i = 0; i < kInputChannels; ++i)
          for (int ky = 0; ky < kKernel; ++ky) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            for (int kx = 0; kx < kKernel; ++kx) {
              const int sx = x + kx - 1;
              if (sx < 0 || sx >= w) continue;
              acc += refiner.conv1_w[((j * kInputChannels + i) * kKernel + ky) *
                                     kKernel + kx] *
                     input3.at(sx, sy, i);
            }
          }
        acts.hidden_pre.at(x, y, j) = acc;
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = refiner.conv2_b;
      for (int j = 0; j < hc; ++j)
        for (int ky = 0; ky < kKernel; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= w) continue;
            const double pre = acts.hidden_pre.at(sx, sy, j);
            if (pre > 0.0)
              acc += refiner.conv2_w[(j * kKernel + ky) * kKernel + kx] * pre;
          }
        }
      acts.output.at(x, y) = acc;
    }
  return acts;
}

DepthMap refine_depth(const ResidualRefiner& refiner, const DepthMap& d_hyb,
                      const DepthMap& d_flow, const ProbabilityMap& m_flow,
                      double scale) {
  check_refine_inputs(refiner, d_hyb, d_flow, m_flow);
  const double s = scale > 0.0 ? scale : median_hybrid_depth(d_hyb);
  const Raster<double> input3 = normalized_input_stack(d_hyb, d_flow, m_flow, s);
  const RefinerActivations acts = refiner_forward(refiner, input3);

  DepthMap out(d_hyb.width(), d_hyb.height(), 0.0, true);
  out.validity = d_hyb.validity;
  for (int y = 0; y < d_hyb.height(); ++y)
    for (int x = 0; x < d_hyb.width(); ++x) {
      const double v = d_hyb.data.at(x, y) + s * acts.output.at(x, y);
      // A residual large enough to push the depth out of (0, inf) is a
      // rejected estimate, not a usable depth: valid entries must stay
      // positive and finite.
      if (v > 0.0 && std::isfinite(v)) {
        out.data.at(x, y) = v;
      } else {
        out.data.at(x, y) = 0.0;
        out.validity.at(x, y) = 0;
      }
    }
  return out;
}

RefinerGradients refiner_gradients(const ResidualRefiner& refiner,
                                   const Raster<double>& input3,
                                   const Raster<double>& upstream) {
  require_same_extent(input3, upstream, "refiner input vs upstream gradient");
  if (!refiner.finite())
    throw std::invalid_argument("refiner: non-finite parameters");
  RefinerGradients grads;
  grads.conv1_w.assign(refiner.conv1_w.size(), 0.0);
  grads.conv1_b.assign(refiner.conv1_b.size(), 0.0);
  grads.conv2_w.assign(refiner.conv2_w.size(), 0.0);
  const RefinerActivations acts = refiner_forward(refiner, input3);
  accumulate_gradients(refiner, input3, acts, upstream, grads);
  return grads;
}

FitResult fit_refiner(const ResidualRefiner& initial,
                      const std::vector<RefinerSample>& dataset, int steps,
                      double learning_rate) {
  if (dataset.empty())
    throw std::invalid_argument("fit_refiner: empty dataset");
  if (steps < 0) throw std::invalid_argument("fit_refiner: negative step count");
  for (const RefinerSample& s : dataset)
    check_refine_inputs(initial, s.d_hyb, s.d_flow, s.m_flow);

  FitResult fit;
  fit.refiner = initial;
  fit.loss_trace.reserve(steps + 1);
  const double inv_items = 1.0 / double(dataset.size());

  for (int step = 0; step <= steps; ++step) {
    RefinerGradients grads;
    grads.conv1_w.assign(fit.refiner.conv1_w.size(), 0.0);
    grads.conv1_b.assign(fit.refiner.conv1_b.size(), 0.0);
    grads.conv2_w.assign(fit.refiner.conv2_w.size(), 0.0);
    double loss = 0.0;

    for (const RefinerSample& sample : dataset) {
      const double s = median_hybrid_depth(sample.d_hyb);
      const Raster<double> input3 =
          normalized_input_stack(sample.d_hyb, sample.d_flow, sample.m_flow, s);
      const RefinerActivations acts = refiner_forward(fit.refiner, input3);
      const int w = input3.width(), h = input3.height();
      const double inv_n = 1.0 / (double(w) * h);

      Raster<double> upstream(w, h, 1, 0.0);
      double item_loss = 0.0;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double refined =
              sample.d_hyb.data.at(x, y) + s * acts.output.at(x, y);
          const double r = refined - sample.d_gt.data.at(x, y);
          item_loss += r * r * inv_n;
          upstream.at(x, y) = 2.0 * s * r * inv_n * inv_items;
        }
      loss += item_loss * inv_items;
      accumulate_gradients(fit.refiner, input3, acts, upstream, grads);
    }

    if (!std::isfinite(loss))
      throw std::runtime_error("fit_refiner: loss diverged at step " +
                               std::to_string(step));
    fit.loss_trace.push_back(loss);
    if (step == steps) break;

    for (size_t i = 0; i < fit.refiner.conv1_w.size(); ++i)
      fit.refiner.conv1_w[i] -= learning_rate * grads.conv1_w[i];
    for (size_t i = 0; i < fit.refiner.conv1_b.size(); ++i)
      fit.refiner.conv1_b[i] -= learning_rate * grads.conv1_b[i];
    for (size_t i = 0; i < fit.refiner.conv2_w.size(); ++i)
      fit.refiner.conv2_w[i] -= learning_rate * grads.conv2_w[i];
    fit.refiner.conv2_b -= learning_rate * grads.conv2_b;
  }
  return fit;
}

double refiner_mse(const ResidualRefiner& refiner,
                   const std::vector<RefinerSample>& dataset) {
  double total = 0.0;
  for (const RefinerSample& s : dataset) {
    const DepthMap refined = refine_depth(refiner, s.d_hyb, s.d_flow, s.m_flow);
    double acc = 0.0;
    for (int y = 0; y < refined.height(); ++y)
      for (int x = 0; x < refined.width(); ++x) {
        const double r = refined.data.at(x, y) - s.d_gt.data.at(x, y);
        acc += r * r;
      }
    total += acc / (double(refined.width()) * refined.height());
  }
  return total / double(dataset.size());
}

double refiner_mae(const ResidualRefiner& refiner,
                   const std::vector<RefinerSample>& dataset) {
  double total = 0.0;
  for (const RefinerSample& s : dataset) {
    const DepthMap refined = refine_depth(refiner, s.d_hyb, s.d_flow, s.m_flow);
    double acc = 0.0;
    for (int y = 0; y < refined.height(); ++y)
      for (int x = 0; x < refined.width(); ++x)
        acc += std::abs(refined.data.at(x, y) - s.d_gt.data.at(x, y));
    total += acc / (double(refined.width()) * refined.height());
  }
  return total / double(dataset.size());
}

}  // namespace flowdepth
