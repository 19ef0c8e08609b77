#pragma once

#include <optional>

#include "voxmap/types.hpp"

namespace voxmap {

/// Undistorted pinhole intrinsics. Camera frame: x right, y down, z forward.
struct CameraModel {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  void validate() const;

  bool in_image(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u < width && v < height;
  }

  /// Point in the camera frame at z-depth `depth` on the ray through (u, v).
  Vec3 backproject(double u, double v, double depth) const {
    return {(u - cx) / fx * depth, (v - cy) / fy * depth, depth};
  }
};

/// Rigid world-from-camera transform: p_world = rotation * p_cam + translation.
class Pose {
 public:
  Pose() = default;
  /// Throws ValidationError unless rotation is orthonormal with det +1 (to 1e-9).
  Pose(const Mat3& rotation, const Vec3& translation);

  /// Camera at `position` with its optical axis along `forward`; `up` fixes roll
  /// (image y points away from it).
  static Pose looking_along(const Vec3& position, const Vec3& forward,
                            const Vec3& up = Vec3::UnitZ());

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 to_world(const Vec3& p_cam) const { return rotation_ * p_cam + translation_; }
  Vec3 to_camera(const Vec3& p_world) const {
    return rotation_.transpose() * (p_world - translation_);
  }

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Pixel and z-depth of a world point, or nothing if it is behind the camera
/// or falls outside the image.
std::optional<Projection> project_point(const CameraModel& cam, const Pose& pose,
                                        const Vec3& point_world);

/// Inverse of project_point for a known depth.
Vec3 backproject_to_world(const CameraModel& cam, const Pose& pose, double u, double v,
                          double depth);

/// Depth-range frustum membership: valid projection and depth in [d_min, d_max].
bool in_frustum(const CameraModel& cam, const Pose& pose, const Vec3& point_world, double d_min,
                double d_max);

}  // namespace voxmap
