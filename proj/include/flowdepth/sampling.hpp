#pragma once

#include "flowdepth/raster.hpp"

namespace flowdepth {

// Bilinear interpolation at (x, y) in the pixel-center convention.
// The in-bounds flag is true iff the sample point lies inside the pixel-center
// hull [0, W-1] x [0, H-1]; weight-zero neighbors at the border are clamped
// and contribute exactly 0. Out-of-bounds samples write zeros and flag false,
// never clamped values.
bool bilinear_sample(const Raster<double>& raster, double x, double y,
                     double* out /* raster.channels() values */);

// Single-channel convenience.
struct ScalarSample {
  double value = 0.0;
  bool in_bounds = false;
};
ScalarSample bilinear_sample_scalar(const Raster<double>& raster, double x,
                                    double y, int channel = 0);

}  // namespace flowdepth
