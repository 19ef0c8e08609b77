#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "test_util.hpp"
#include "voxmap/camera.hpp"

using namespace voxmap;

namespace {

Pose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const Eigen::Quaterniond q = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
  return Pose(q.toRotationMatrix(), voxmap::test::random_vec(rng, -10.0, 10.0));
}

}  // namespace

TEST_CASE("camera validation") {
  CameraModel cam;
  CHECK_NOTHROW(cam.validate());
  cam.fx = 0;
  CHECK_THROWS_AS(cam.validate(), ValidationError);
  cam = CameraModel{};
  cam.cx = 640;
  CHECK_THROWS_AS(cam.validate(), ValidationError);
  cam = CameraModel{};
  cam.cy = -1;
  CHECK_THROWS_AS(cam.validate(), ValidationError);
}

TEST_CASE("pose validation") {
  CHECK_NOTHROW(Pose(Mat3::Identity(), Vec3::Zero()));
  Mat3 scaled = Mat3::Identity() * 1.001;
  CHECK_THROWS_AS(Pose(scaled, Vec3::Zero()), ValidationError);
  Mat3 reflection = Mat3::Identity();
  reflection(2, 2) = -1;
  CHECK_THROWS_AS(Pose(reflection, Vec3::Zero()), ValidationError);
  CHECK_THROWS_AS(Pose::looking_along(Vec3::Zero(), Vec3::UnitZ()), ValidationError);

  const Pose p = Pose::looking_along(Vec3(1, 2, 3), Vec3::UnitY());
  CHECK((p.rotation().col(2) - Vec3::UnitY()).norm() < 1e-12);
  CHECK((p.rotation().col(1) - (-Vec3::UnitZ())).norm() < 1e-12);  // image y points down
  CHECK(p.rotation().determinant() == doctest::Approx(1.0));
}

TEST_CASE("project_point: optical axis, behind, outside") {
  const CameraModel cam;
  const Pose pose = Pose::looking_along(Vec3(1, 2, 3), Vec3(1, 1, 0));
  const Vec3 axis = Vec3(1, 1, 0).normalized();
  const auto on_axis = project_point(cam, pose, pose.translation() + 7.0 * axis);
  REQUIRE(on_axis);
  CHECK(on_axis->u == doctest::Approx(cam.cx));
  CHECK(on_axis->v == doctest::Approx(cam.cy));
  CHECK(on_axis->depth == doctest::Approx(7.0));

  CHECK_FALSE(project_point(cam, pose, pose.translation() - 3.0 * axis));
  CHECK_FALSE(project_point(cam, pose, pose.translation()));
  // 45 degrees off-axis with a 500 px focal length lands outside 640 px.
  const Vec3 side = pose.rotation().col(0);
  CHECK_FALSE(project_point(cam, pose, pose.translation() + 5.0 * axis + 5.0 * side));
}

TEST_CASE("in_frustum respects the depth range") {
  const CameraModel cam;
  const Pose pose;
  CHECK(in_frustum(cam, pose, Vec3(0, 0, 5), 0.5, 30));
  CHECK(in_frustum(cam, pose, Vec3(0, 0, 0.5), 0.5, 30));
  CHECK_FALSE(in_frustum(cam, pose, Vec3(0, 0, 0.4), 0.5, 30));
  CHECK_FALSE(in_frustum(cam, pose, Vec3(0, 0, 30.5), 0.5, 30));
}

TEST_CASE("property: project then backproject is the identity") {
  const CameraModel cam;
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> pix_u(0.0, cam.width), pix_v(0.0, cam.height),
      depth(0.1, 80.0);
  for (int i = 0; i < 2000; ++i) {
    const Pose pose = random_pose(rng);
    const Vec3 p = backproject_to_world(cam, pose, pix_u(rng), pix_v(rng), depth(rng));
    const auto proj = project_point(cam, pose, p);
    REQUIRE(proj);
    const Vec3 back = backproject_to_world(cam, pose, proj->u, proj->v, proj->depth);
    CHECK((back - p).norm() < 1e-9);
  }
}
