#include "voxmap/camera.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

namespace voxmap {

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("camera: focal lengths must be > 0");
  if (width <= 0 || height <= 0) throw ValidationError("camera: image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw ValidationError("camera: principal point outside the image");
  }
}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  constexpr double kTol = 1e-9;
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw ValidationError("pose: non-finite entries");
  }
  const double orth_err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orth_err > kTol) {
    throw ValidationError("pose: rotation not orthonormal (error " + std::to_string(orth_err) + ")");
  }
  if (std::abs(rotation.determinant() - 1.0) > kTol) {
    throw ValidationError("pose: rotation determinant is not +1");
  }
}

Pose Pose::looking_along(const Vec3& position, const Vec3& forward, const Vec3& up) {
  const Vec3 z = forward.normalized();
  Vec3 x = z.cross(up);
  if (x.norm() < 1e-12) throw ValidationError("pose: forward is parallel to up");
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return Pose(r, position);
}

std::optional<Projection> project_point(const CameraModel& cam, const Pose& pose,
                                        const Vec3& point_world) {
  const Vec3 pc = pose.to_camera(point_world);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const double u = cam.fx * pc.x() / pc.z() + cam.cx;
  const double v = cam.fy * pc.y() / pc.z() + cam.cy;
  if (!cam.in_image(u, v)) return std::nullopt;
  return Projection{u, v, pc.z()};
}

Vec3 backproject_to_world(const CameraModel& cam, const Pose& pose, double u, double v,
                          double depth) {
  return pose.to_world(cam.backproject(u, v, depth));
}

bool in_frustum(const CameraModel& cam, const Pose& pose, const Vec3& point_world, double d_min,
                double d_max) {
  const auto proj = project_point(cam, pose, point_world);
  return proj && proj->depth >= d_min && proj->depth <= d_max;
}

}  // namespace voxmap
