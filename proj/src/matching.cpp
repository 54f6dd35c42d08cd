#include "flowdepth/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "flowdepth/sampling.hpp"

namespace flowdepth {

Raster<double> normalize_depth(const DepthMap& depth, double epsilon) {
  const int w = depth.width(), h = depth.height();
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (depth.valid(x, y)) {
        const double d = depth.data.at(x, y);
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
        any = true;
      }
  if (!any)
    throw std::invalid_argument("normalize_depth: no valid depth pixels");

  Raster<double> out(w, h, 1, 0.0);
  const double denom = dmax - dmin + epsilon;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (depth.valid(x, y))
        out.at(x, y) = (depth.data.at(x, y) - dmin) / denom;
  return out;
}

int adaptive_radius(double d_norm, const MatchingConfig& cfg) {
  const int r = int(std::floor(cfg.r_min + d_norm * (cfg.r_max - cfg.r_min)));
  return std::clamp(r, cfg.r_min, cfg.r_max);
}

WindowOffsets window_offsets(int r, int r_max) {
  if (r < 0 || r_max < 0 || r > r_max)
    throw std::invalid_argument("window_offsets: need 0 <= r <= r_max");
  WindowOffsets w;
  w.r_max = r_max;
  const int side = 2 * r_max + 1;
  w.offsets.reserve(size_t(side) * side);
  w.valid.reserve(size_t(side) * side);
  for (int dy = -r_max; dy <= r_max; ++dy)
    for (int dx = -r_max; dx <= r_max; ++dx) {
      w.offsets.push_back({dx, dy});
      const bool ok = std::max(std::abs(dx), std::abs(dy)) <= r;
      w.valid.push_back(ok ? 1 : 0);
      w.valid_count += ok ? 1 : 0;
    }
  return w;
}

OffsetScores match_scores(const FeatureMap& fa, const FeatureMap& fb, int x,
                          int y, const WindowOffsets& window) {
  if (fa.channels() != fb.channels())
    throw std::invalid_argument("match_scores: channel counts differ");
  if (!fa.contains(x, y))
    throw std::invalid_argument("match_scores: pixel outside raster");
  const int c = fa.channels();
  const double inv_sqrt_c = 1.0 / std::sqrt(double(c));

  OffsetScores s;
  s.score.assign(window.offsets.size(), 0.0);
  s.included.assign(window.offsets.size(), 0);
  std::vector<double> sample(c);
  for (size_t k = 0; k < window.offsets.size(); ++k) {
    if (!window.valid[k]) continue;
    const double sx = double(x) + window.offsets[k][0];
    const double sy = double(y) + window.offsets[k][1];
    if (!bilinear_sample(fb, sx, sy, sample.data())) continue;
    double dot = 0.0;
    for (int j = 0; j < c; ++j) dot += fa.at(x, y, j) * sample[j];
    s.score[k] = dot * inv_sqrt_c;
    s.included[k] = 1;
    ++s.included_count;
  }
  return s;
}

MatchDistribution matching_distribution(const OffsetScores& scores,
                                        const WindowOffsets& window) {
  if (scores.score.size() != window.offsets.size())
    throw std::invalid_argument("matching_distribution: window size mismatch");
  if (scores.included_count == 0)
    throw std::invalid_argument(
        "matching_distribution: isolated pixel, no included offsets");

  double smax = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < scores.score.size(); ++k)
    if (scores.included[k]) smax = std::max(smax, scores.score[k]);

  MatchDistribution d;
  d.prob.assign(scores.score.size(), 0.0);
  double z = 0.0;
  for (size_t k = 0; k < scores.score.size(); ++k)
    if (scores.included[k]) {
      d.prob[k] = std::exp(scores.score[k] - smax);
      z += d.prob[k];
    }
  for (size_t k = 0; k < d.prob.size(); ++k)
    if (scores.included[k]) {
      d.prob[k] /= z;
      d.max_prob = std::max(d.max_prob, d.prob[k]);
      d.flow_x += d.prob[k] * window.offsets[k][0];
      d.flow_y += d.prob[k] * window.offsets[k][1];
    }
  return d;
}

MatchingResult compute_matching(const FeatureMap& fa, const FeatureMap& fb,
                                const DepthMap& d_hyb,
                                const MatchingConfig& cfg) {
  if (!fa.same_shape(fb))
    throw std::invalid_argument("compute_matching: feature shapes differ");
  require_same_extent(fa, d_hyb, "features vs hybrid depth");
  if (cfg.r_min < 0 || cfg.r_max < cfg.r_min)
    throw std::invalid_argument("compute_matching: need 0 <= r_min <= r_max");

  const int w = fa.width(), h = fa.height();
  Raster<double> d_norm = normalize_depth(d_hyb, cfg.epsilon);

  // One pre-generated window per distinct radius.
  std::vector<WindowOffsets> windows;
  windows.reserve(cfg.r_max - cfg.r_min + 1);
  for (int r = cfg.r_min; r <= cfg.r_max; ++r)
    windows.push_back(window_offsets(r, cfg.r_max));

  MatchingResult res;
  res.flow = FlowField(w, h, 2, 0.0);
  res.confidence = ProbabilityMap(w, h, 1, 0.0);
  res.radius_map = Raster<int>(w, h, 1, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int r = adaptive_radius(d_norm.at(x, y), cfg);
      const WindowOffsets& window = windows[r - cfg.r_min];
      const OffsetScores scores = match_scores(fa, fb, x, y, window);
      const MatchDistribution dist = matching_distribution(scores, window);
      res.flow.at(x, y, 0) = dist.flow_x;
      res.flow.at(x, y, 1) = dist.flow_y;
      res.confidence.at(x, y) = dist.max_prob;
      res.radius_map.at(x, y) = r;
    }
  return res;
}

}  // namespace flowdepth
