#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hsc {

/// Pinhole calibration without distortion. Pixel coordinates are continuous
/// with the image occupying [0, width) x [0, height).
struct Intrinsics {
  double focal = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::uint32_t width = 1;
  std::uint32_t height = 1;

  [[nodiscard]] bool contains(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.y() >= 0.0 && px.x() < static_cast<double>(width) &&
           px.y() < static_cast<double>(height);
  }
  [[nodiscard]] bool valid() const {
    return width > 0 && height > 0 && focal > 0.0 && std::isfinite(focal) &&
           std::isfinite(cx) && std::isfinite(cy);
  }
  /// Unit bearing vector (camera frame) through a pixel.
  [[nodiscard]] Eigen::Vector3d bearing(const Eigen::Vector2d& px) const {
    return Eigen::Vector3d((px.x() - cx) / focal, (px.y() - cy) / focal, 1.0).normalized();
  }

  bool operator==(const Intrinsics&) const = default;
};

/// Camera pose: rotation maps world to camera, center in world coordinates.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d center = Eigen::Vector3d::Zero();

  [[nodiscard]] Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
    return rotation * (world - center);
  }
  [[nodiscard]] Eigen::Vector3d translation() const { return -rotation * center; }

  static Pose from_rt(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
    return Pose{r, -r.transpose() * t};
  }

  /// Camera at `eye` looking at `target`; image y axis points along -up.
  static Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                      const Eigen::Vector3d& up = Eigen::Vector3d::UnitZ()) {
    const Eigen::Vector3d z = (target - eye).normalized();
    Eigen::Vector3d x = z.cross(up);
    if (x.norm() < 1e-12) x = z.cross(Eigen::Vector3d::UnitX());
    x.normalize();
    const Eigen::Vector3d y = z.cross(x);
    Pose p;
    p.rotation.row(0) = x.transpose();
    p.rotation.row(1) = y.transpose();
    p.rotation.row(2) = z.transpose();
    p.center = eye;
    return p;
  }

  bool operator==(const Pose&) const = default;
};

inline bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9) {
  if (!r.allFinite()) return false;
  const double ortho = (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

/// Projects a world point; nullopt when the point is not strictly in front.
inline std::optional<Eigen::Vector2d> project(const Pose& pose, const Intrinsics& k,
                                              const Eigen::Vector3d& world) {
  const Eigen::Vector3d c = pose.to_camera(world);
  if (!(c.z() > 0.0)) return std::nullopt;
  return Eigen::Vector2d(k.focal * c.x() / c.z() + k.cx, k.focal * c.y() / c.z() + k.cy);
}

/// Pixel distance between the projection of `world` and `measured`.
/// Points behind the camera yield +infinity so they never count as inliers.
inline double reprojection_error(const Pose& pose, const Intrinsics& k,
                                 const Eigen::Vector2d& measured, const Eigen::Vector3d& world) {
  const auto px = project(pose, k, world);
  if (!px) return std::numeric_limits<double>::infinity();
  return (*px - measured).norm();
}

struct PoseError {
  double position_m = 0.0;
  double rotation_deg = 0.0;
};

/// Angle of R_est * R_gt^T. Evaluated as atan2(sin, cos) of the relative
/// rotation, which equals arccos((trace - 1) / 2) but stays accurate near 0.
inline double rotation_angle_deg(const Eigen::Matrix3d& estimate, const Eigen::Matrix3d& truth) {
  // Entry-wise row dot products keep rel exactly symmetric when the inputs match.
  Eigen::Matrix3d rel;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rel(i, j) = estimate.row(i).dot(truth.row(j));
  const double cos_theta = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Eigen::Vector3d axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  const double sin_theta = std::min(1.0, 0.5 * axis.norm());
  return std::atan2(sin_theta, cos_theta) * 180.0 / std::numbers::pi;
}

inline PoseError pose_error(const Pose& estimate, const Pose& truth) {
  return {(estimate.center - truth.center).norm(),
          rotation_angle_deg(estimate.rotation, truth.rotation)};
}

}  // namespace hsc
