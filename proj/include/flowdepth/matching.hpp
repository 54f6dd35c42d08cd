#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "flowdepth/raster.hpp"

namespace flowdepth {

struct MatchingConfig {
  int r_min = 1;
  int r_max = 8;
  double epsilon = 1e-6;  // stabilizer in the depth normalization denominator
};

struct MatchingResult {
  FlowField flow;              // expected displacement per pixel
  ProbabilityMap confidence;   // max probability of the matching distribution
  Raster<int> radius_map;      // search radius per pixel
};

// (D - D_min) / (D_max - D_min + epsilon) over valid pixels; invalid map to 0.
// Output range is [0, 1). Throws if no pixel is valid.
Raster<double> normalize_depth(const DepthMap& depth, double epsilon);

// floor(r_min + d_norm * (r_max - r_min)), clamped into [r_min, r_max].
int adaptive_radius(double d_norm, const MatchingConfig& cfg);

// The full (2 r_max + 1)^2 window in canonical order (dy outer, dx inner,
// each from -r_max to +r_max) with validity flags for the chebyshev ball
// of radius r. Offsets outside the ball stay in the list but are invalid.
struct WindowOffsets {
  int r_max = 0;
  std::vector<std::array<int, 2>> offsets;  // {dx, dy}
  std::vector<std::uint8_t> valid;
  int valid_count = 0;
};
WindowOffsets window_offsets(int r, int r_max);

// Correlation scores <Fa(u), Fb(u + delta)> / sqrt(C) over a window.
// Target samples are bilinear; offsets whose sample leaves the pixel-center
// hull are marked excluded, as are window-invalid offsets.
struct OffsetScores {
  std::vector<double> score;
  std::vector<std::uint8_t> included;
  int included_count = 0;
};
OffsetScores match_scores(const FeatureMap& fa, const FeatureMap& fb, int x,
                          int y, const WindowOffsets& window);

// Softmax (max-subtracted) over included offsets. Probabilities of excluded
// offsets are 0. flow is the probability-weighted mean offset; max_prob the
// distribution peak. Throws if nothing is included.
struct MatchDistribution {
  std::vector<double> prob;
  double max_prob = 0.0;
  double flow_x = 0.0;
  double flow_y = 0.0;
};
MatchDistribution matching_distribution(const OffsetScores& scores,
                                        const WindowOffsets& window);

// Per-pixel composition of the four operations above. Deterministic: fixed
// canonical window order and summation order, bit-for-bit reproducible.
MatchingResult compute_matching(const FeatureMap& fa, const FeatureMap& fb,
                                const DepthMap& d_hyb,
                                const MatchingConfig& cfg);

}  // namespace flowdepth
