#pragma once

#include <string>

#include "flowdepth/camera.hpp"
#include "flowdepth/fusion.hpp"
#include "flowdepth/raster.hpp"

namespace flowdepth {

// Format errors (malformed header, truncated payload, non-finite values on
// write) raise std::runtime_error whose message carries the byte offset.

// PFM: "Pf" (1 channel) or "PF" (3 channels), 32-bit floats, bottom-to-top
// rows, scale sign encodes endianness; this artifact writes -1.0
// (little-endian) and byteswaps positive-scale files on read.
Raster<double> read_pfm(const std::string& path);
void write_pfm(const std::string& path, const Raster<double>& raster);

// Channel-stacked container for C-channel rasters: a single-channel PFM of
// height C * H holding the channel planes top to bottom.
Raster<double> read_pfm_stacked(const std::string& path, int channels);
void write_pfm_stacked(const std::string& path, const Raster<double>& raster);

// Binary PPM (P6, maxval 255). Writes round-half-up quantization of [0, 1]
// values; reads divide by 255.
ImageRaster read_ppm(const std::string& path);
void write_ppm(const std::string& path, const ImageRaster& image);

// Camera text file: line 1 "fx fy cx cy width height", lines 2-4 the
// row-major 3x4 [R|t]. '#' comments and blank lines are tolerated. Rotations
// within 1e-6 of orthonormal are re-orthonormalized on read; anything worse
// (or det -1) is rejected.
struct CameraFile {
  CameraIntrinsics intrinsics;
  RigidTransform transform;
};
CameraFile read_camera_file(const std::string& path);
void write_camera_file(const std::string& path, const CameraIntrinsics& K,
                       const RigidTransform& T);

// Refiner parameters: text header "refiner v1 <hidden>" then a flat
// little-endian float32 stream (conv1 weights, conv1 biases, conv2 weights,
// conv2 bias).
ResidualRefiner read_refiner(const std::string& path);
void write_refiner(const std::string& path, const ResidualRefiner& refiner);

// Plain-text "x y z" lines for unprojected depth pixels.
void write_point_list(const std::string& path,
                      const std::vector<Eigen::Vector3d>& points);

// Value formatting for key=value metric blocks: shortest 6-significant-digit
// form, integers keep one decimal ("1.0"), infinities print "inf".
std::string format_metric(double value);

}  // namespace flowdepth
