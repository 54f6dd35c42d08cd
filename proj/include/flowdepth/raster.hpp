#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowdepth {

// Row-major, top-left origin, x right, y down, channel-interleaved storage.
// Integer coordinates address pixel centers.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1 || channels < 1)
      throw std::invalid_argument("raster dimensions must be positive");
    data_.assign(static_cast<size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  T& at(int x, int y, int c = 0) {
    return data_[idx(x, y, c)];
  }
  const T& at(int x, int y, int c = 0) const {
    return data_[idx(x, y, c)];
  }

  bool contains(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Raster& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ &&
           a.channels_ == b.channels_ && a.data_ == b.data_;
  }

 private:
  size_t idx(int x, int y, int c) const {
    return (static_cast<size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using FeatureMap = Raster<double>;      // H x W x C descriptor field
using FlowField = Raster<double>;       // H x W x 2, (dx, dy) in pixels
using ProbabilityMap = Raster<double>;  // H x W x 1, values in [0, 1]
using ImageRaster = Raster<double>;     // H x W x 3, values in [0, 1]
using BinaryMask = Raster<std::uint8_t>;  // H x W x 1, values in {0, 1}

// Per-pixel metric depth with validity. Valid entries are finite and > 0.
struct DepthMap {
  Raster<double> data;        // H x W x 1, meters
  Raster<std::uint8_t> validity;  // H x W x 1, {0, 1}

  DepthMap() = default;
  DepthMap(int width, int height, double fill = 0.0, bool valid = true)
      : data(width, height, 1, fill),
        validity(width, height, 1, valid ? std::uint8_t{1} : std::uint8_t{0}) {}

  int width() const { return data.width(); }
  int height() const { return data.height(); }
  bool valid(int x, int y) const { return validity.at(x, y) != 0; }
};

template <typename A, typename B>
void require_same_extent(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height())
    throw std::invalid_argument(std::string("shape mismatch: ") + what);
}

}  // namespace flowdepth
