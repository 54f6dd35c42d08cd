#include "flowdepth/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace flowdepth {

namespace {

// Largest per-entry deviation of R^T R from the identity.
double orthonormality_error(const Eigen::Matrix3d& R) {
  Eigen::Matrix3d gram = R.transpose() * R - Eigen::Matrix3d::Identity();
  return gram.cwiseAbs().maxCoeff();
}

}  // namespace

CameraIntrinsics::CameraIntrinsics(double fx_, double fy_, double cx_,
                                   double cy_, int w, int h)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
  if (!(fx > 0) || !(fy > 0))
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) ||
      !std::isfinite(cy))
    throw std::invalid_argument("intrinsics: entries must be finite");
  if (w < 2 || h < 2)
    throw std::invalid_argument("intrinsics: raster extent must be at least 2x2");
}

Eigen::Matrix3d CameraIntrinsics::kmatrix() const {
  Eigen::Matrix3d K;
  K << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return K;
}

RigidTransform RigidTransform::from_parts(const Eigen::Matrix3d& rotation,
                                          const Eigen::Vector3d& translation) {
  if (!rotation.allFinite() || !translation.allFinite())
    throw std::invalid_argument("rigid transform: entries must be finite");
  if (rotation.determinant() < 0)
    throw std::invalid_argument("rigid transform: reflection rejected");

  RigidTransform T;
  T.translation = translation;
  double err = orthonormality_error(rotation);
  if (err <= 1e-9) {
    T.rotation = rotation;
  } else if (err <= 1e-6) {
    // Polar decomposition: nearest rotation in Frobenius norm.
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d R = svd.matrixU() * svd.matrixV().transpose();
    if (R.determinant() < 0)
      throw std::invalid_argument("rigid transform: reflection rejected");
    T.rotation = R;
  } else {
    throw std::invalid_argument("rigid transform: rotation not orthonormal");
  }
  if (std::abs(T.rotation.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("rigid transform: determinant not +1");
  return T;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform T;
  T.rotation = rotation.transpose();
  T.translation = -(rotation.transpose() * translation);
  return T;
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  RigidTransform T;
  T.rotation = rotation * other.rotation;
  T.translation = rotation * other.translation + translation;
  return T;
}

Eigen::Vector2d project(const Eigen::Vector3d& point, const CameraIntrinsics& K) {
  if (!(point.z() > 0))
    throw std::domain_error("project: point has non-positive depth");
  return {K.fx * point.x() / point.z() + K.cx,
          K.fy * point.y() / point.z() + K.cy};
}

Eigen::Vector3d unproject(const Eigen::Vector2d& u, double depth,
                          const CameraIntrinsics& K) {
  if (!(depth > 0) || !std::isfinite(depth))
    throw std::domain_error("unproject: depth must be positive and finite");
  return {depth * (u.x() - K.cx) / K.fx, depth * (u.y() - K.cy) / K.fy, depth};
}

Eigen::Vector3d transform_point(const Eigen::Vector3d& point,
                                const RigidTransform& T) {
  return T.rotation * point + T.translation;
}

std::vector<Eigen::Vector3d> unproject_depth_map(const DepthMap& depth,
                                                 const CameraIntrinsics& K) {
  std::vector<Eigen::Vector3d> points;
  points.reserve(static_cast<size_t>(depth.width()) * depth.height());
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x)
      if (depth.valid(x, y))
        points.push_back(unproject({double(x), double(y)}, depth.data.at(x, y), K));
  return points;
}

}  // namespace flowdepth
