#include "flowdepth/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace flowdepth {

bool bilinear_sample(const Raster<double>& raster, double x, double y,
                     double* out) {
  const int w = raster.width(), h = raster.height(), c = raster.channels();
  if (!(x >= 0.0 && x <= double(w - 1) && y >= 0.0 && y <= double(h - 1))) {
    std::fill(out, out + c, 0.0);
    return false;
  }
  const int x0 = int(std::floor(x));
  const int y0 = int(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double wx = x - x0;
  const double wy = y - y0;
  for (int k = 0; k < c; ++k) {
    const double top = (1.0 - wx) * raster.at(x0, y0, k) + wx * raster.at(x1, y0, k);
    const double bot = (1.0 - wx) * raster.at(x0, y1, k) + wx * raster.at(x1, y1, k);
    out[k] = (1.0 - wy) * top + wy * bot;
  }
  return true;
}

ScalarSample bilinear_sample_scalar(const Raster<double>& raster, double x,
                                    double y, int channel) {
  const int w = raster.width(), h = raster.height();
  ScalarSample s;
  if (!(x >= 0.0 && x <= double(w - 1) && y >= 0.0 && y <= double(h - 1)))
    return s;
  const int x0 = int(std::floor(x));
  const int y0 = int(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double wx = x - x0;
  const double wy = y - y0;
  const double top = (1.0 - wx) * raster.at(x0, y0, channel) +
                     wx * raster.at(x1, y0, channel);
  const double bot = (1.0 - wx) * raster.at(x0, y1, channel) +
                     wx * raster.at(x1, y1, channel);
  s.value = (1.0 - wy) * top + wy * bot;
  s.in_bounds = true;
  return s;
}

}  // namespace flowdepth
