#pragma once

#include <Eigen/Dense>
#include <vector>

#include "flowdepth/raster.hpp"

namespace flowdepth {

// Pinhole intrinsics. fx, fy in pixels; (cx, cy) is the principal point in
// the pixel-center convention.
struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h);

  Eigen::Matrix3d kmatrix() const;
};

// Rigid motion p -> R p + t. R is orthonormal with det +1 within 1e-9 per
// entry; construction re-orthonormalizes inputs within 1e-6 of rigid via
// polar decomposition and rejects anything worse (or any reflection).
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  RigidTransform() = default;
  static RigidTransform from_parts(const Eigen::Matrix3d& rotation,
                                   const Eigen::Vector3d& translation);

  RigidTransform inverse() const;
  // Applies *this after other: result(p) = this(other(p)).
  RigidTransform compose(const RigidTransform& other) const;
};

// Projects a camera-frame point with z > 0 to pixel coordinates.
// Throws std::domain_error for z <= 0.
Eigen::Vector2d project(const Eigen::Vector3d& point, const CameraIntrinsics& K);

// Lifts pixel u at metric depth d > 0 back to the camera frame.
Eigen::Vector3d unproject(const Eigen::Vector2d& u, double depth,
                          const CameraIntrinsics& K);

Eigen::Vector3d transform_point(const Eigen::Vector3d& point,
                                const RigidTransform& T);

// Camera-frame points for every valid depth pixel, row-major pixel order.
std::vector<Eigen::Vector3d> unproject_depth_map(const DepthMap& depth,
                                                 const CameraIntrinsics& K);

}  // namespace flowdepth
