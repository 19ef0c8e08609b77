#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <set>

#include "test_util.hpp"
#include "voxmap/bench.hpp"
#include "voxmap/frustum_query.hpp"
#include "voxmap/scene.hpp"

using namespace voxmap;

namespace {

VoxelMap map_from(const std::vector<MapPoint>& points, double voxel_size) {
  VoxelMapConfig c;
  c.voxel_size = voxel_size;
  c.table_size_n = 10007;
  VoxelMap map(c);
  for (const auto& p : points) map.insert_point(p);
  return map;
}

// A camera whose single sampled pixel is the principal point.
CameraModel one_pixel_camera() {
  CameraModel cam;
  cam.width = 1;
  cam.height = 1;
  cam.cx = 0.5;
  cam.cy = 0.5;
  return cam;
}

std::vector<double> depths_of(std::span<const Vec3> ray) {
  std::vector<double> d;
  for (const auto& s : ray) d.push_back(s.z());
  return d;
}

// Reference query: rays visited in reverse order, each resolved independently
// by probing the map directly.
std::set<VoxelKey> reference_visible_keys(const VoxelMap& map, const RayTemplate& tmpl,
                                          const Pose& pose, bool first_hit_only) {
  std::set<VoxelKey> keys;
  for (std::size_t r = tmpl.ray_count(); r-- > 0;) {
    for (const Vec3& s : tmpl.ray(r)) {
      const VoxelKey k = map.key(pose.to_world(s));
      if (map.query_voxel(k) == nullptr) continue;
      keys.insert(k);
      if (first_hit_only) break;
    }
  }
  return keys;
}

std::set<VoxelKey> key_set(const VisibleSet& set) {
  const auto v = set.voxels_hit();
  return {v.begin(), v.end()};
}

struct RandomCase {
  Scene scene;
  Pose pose;
};

RandomCase random_case(std::uint64_t seed, std::size_t count = 3000) {
  RandomBoxParams box;
  box.count = count;
  RandomCase c{make_random_box_scene(box, seed), make_orbit_trajectory(box, {32.0, 1}, seed).poses[0]};
  return c;
}

}  // namespace

TEST_CASE("build_ray_template: single pixel grid") {
  const CameraModel cam;
  const auto t = build_ray_template(cam, 640, 0.5, 30.0, 2.0);
  CHECK(t.ray_count() == 1);
  CHECK(t.pixels()[0].u == 320.0);
  CHECK(t.pixels()[0].v == 320.0);
  CHECK(t.total_samples() == t.samples_per_ray());
}

TEST_CASE("build_ray_template: central ray spacing") {
  const auto t = build_ray_template(one_pixel_camera(), 1.0, 1.0, 9.0, 2.0);
  REQUIRE(t.ray_count() == 1);
  CHECK(t.samples_per_ray() == 5);
  CHECK(depths_of(t.ray(0)) == std::vector<double>{1, 3, 5, 7, 9});
  for (const auto& s : t.ray(0)) {
    CHECK(s.x() == 0.0);
    CHECK(s.y() == 0.0);
  }
}

TEST_CASE("build_ray_template: default grid has 300 rays") {
  const auto t = build_ray_template(CameraModel{}, 32, 0.5, 30.0, 2.0);
  CHECK(t.ray_count() == 300);
  CHECK(t.pixels().front().u == 16.0);
  CHECK(t.pixels().front().v == 16.0);
  CHECK(t.pixels().back().u == 624.0);
  CHECK(t.pixels().back().v == 464.0);
}

TEST_CASE("build_ray_template: invalid parameters") {
  const CameraModel cam;
  CHECK_THROWS_AS(build_ray_template(cam, 32, 5.0, 5.0, 2.0), ValidationError);
  CHECK_THROWS_AS(build_ray_template(cam, 32, 9.0, 1.0, 2.0), ValidationError);
  CHECK_THROWS_AS(build_ray_template(cam, 32, 0.0, 1.0, 2.0), ValidationError);
  CHECK_THROWS_AS(build_ray_template(cam, 0.5, 1.0, 9.0, 2.0), ValidationError);
  CHECK_THROWS_AS(build_ray_template(cam, 32, 1.0, 9.0, 0.0), ValidationError);
  CHECK_THROWS_AS(build_ray_template(cam, 2000, 1.0, 9.0, 2.0), ValidationError);  // r = 0
}

TEST_CASE("property: template invariants over random parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> step(1.0, 200.0), dmin(0.1, 5.0), span(0.1, 60.0),
      vsize(0.05, 25.0), focal(50.0, 2000.0);
  for (int trial = 0; trial < 40; ++trial) {
    CameraModel cam;
    cam.fx = focal(rng);
    cam.fy = focal(rng);
    const double d_min = dmin(rng);
    const double d_max = d_min + span(rng);
    const double vs = vsize(rng);
    const auto t = build_ray_template(cam, step(rng), d_min, d_max, vs);
    REQUIRE(t.ray_count() > 0);
    CHECK(t.total_samples() == t.ray_count() * t.samples_per_ray());
    for (const auto& px : t.pixels()) CHECK(cam.in_image(px.u, px.v));
    for (std::size_t r = 0; r < t.ray_count(); ++r) {
      const auto ray = t.ray(r);
      CHECK(ray.front().z() == d_min);
      CHECK(ray.back().z() == d_max);
      for (std::size_t j = 1; j < ray.size(); ++j) {
        REQUIRE(ray[j].z() > ray[j - 1].z());
        REQUIRE((ray[j] - ray[j - 1]).norm() <= vs * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("query_visible: empty map probes every sample") {
  VoxelMap map;
  const auto t = build_ray_template(CameraModel{}, 32, 0.5, 30.0, 2.0);
  const auto set = query_visible(map, t, Pose{}, true);
  CHECK(set.voxels.empty());
  CHECK(set.point_count() == 0);
  CHECK(set.probes == t.total_samples());
  CHECK(std::all_of(set.first_hit.begin(), set.first_hit.end(), [](auto i) { return i == -1; }));
}

TEST_CASE("query_visible: voxel size mismatch is a configuration error") {
  VoxelMap map;  // 2 m
  const auto t = build_ray_template(CameraModel{}, 32, 0.5, 30.0, 1.0);
  CHECK_THROWS_AS(query_visible(map, t, Pose{}), ConfigError);
}

TEST_CASE("query_visible: a near plane hides a far plane on shared rays") {
  // Camera at the origin looking along +z; planes z = 5 and z = 15, both wider
  // than the field of view at their depth.
  std::vector<MapPoint> points;
  PointId id = 0;
  for (double x = -20; x <= 20; x += 0.5) {
    for (double y = -20; y <= 20; y += 0.5) {
      points.push_back({id++, Vec3(x + 0.1, y + 0.1, 5.5), {}});
      points.push_back({id++, Vec3(x + 0.1, y + 0.1, 15.5), {}});
    }
  }
  const auto map = map_from(points, 2.0);
  const auto t = build_ray_template(CameraModel{}, 32, 0.5, 30.0, 2.0);
  auto far_points = [](const VisibleSet& s) {
    std::size_t n = 0;
    for (const auto* p : s.points()) n += p->position.z() > 10 ? 1 : 0;
    return n;
  };
  const auto first = query_visible(map, t, Pose{}, true);
  const auto all = query_visible(map, t, Pose{}, false);
  CHECK(first.point_count() > 0);
  CHECK(far_points(first) == 0);
  CHECK(far_points(all) > 0);
  CHECK(first.probes < all.probes);
  CHECK(all.probes == t.total_samples());
}

TEST_CASE("query_visible: wall facing the camera matches the brute-force oracle") {
  const Scene wall = make_wall_scene(100.0, 1000, 3);
  const auto map = map_from(wall.points, 2.0);
  const CameraModel cam;
  const auto t = build_ray_template(cam, 32, 0.5, 30.0, 2.0);
  for (const double x : {10.0, 50.0, 90.0}) {
    const Pose pose = Pose::looking_along(Vec3(x, -5.0, 2.0), Vec3::UnitY());
    const auto truth = brute_force_visible(wall, cam, pose, 0.5, 30.0);
    REQUIRE(!truth.empty());
    std::vector<PointId> got;
    for (const auto* p : query_visible(map, t, pose, true).points()) got.push_back(p->id);
    std::sort(got.begin(), got.end());
    const auto f = bench::compare_ids(got, truth);
    CHECK(f.recall >= 0.95);
  }
}

TEST_CASE("property: probe bound, dedup, FoV soundness, occlusion dominance, order independence") {
  const CameraModel cam;
  const double vs = 2.0, d_min = 0.5;
  const auto t = build_ray_template(cam, 32, d_min, 30.0, vs);
  const double margin = vs * std::max(cam.fx, cam.fy) / d_min;
  for (std::uint64_t seed = 100; seed < 112; ++seed) {
    const auto c = random_case(seed);
    const auto map = map_from(c.scene.points, vs);
    for (const bool first_hit_only : {true, false}) {
      const auto set = query_visible(map, t, c.pose, first_hit_only);
      CHECK(set.probes <= t.total_samples());
      if (!first_hit_only) CHECK(set.probes == t.total_samples());

      const auto keys = set.voxels_hit();
      CHECK(std::set<VoxelKey>(keys.begin(), keys.end()).size() == keys.size());
      CHECK(key_set(set) == reference_visible_keys(map, t, c.pose, first_hit_only));

      for (const auto& hit : set.voxels) {
        // Some world-frame sample lies in the voxel.
        bool sampled = false;
        for (const auto& s : t.samples()) {
          if (map.key(c.pose.to_world(s)) == hit.voxel->key) {
            sampled = true;
            break;
          }
        }
        CHECK(sampled);
        for (const auto& p : hit.voxel->points) {
          const Vec3 pc = c.pose.to_camera(p.position);
          REQUIRE(pc.z() > 0);
          const double u = cam.fx * pc.x() / pc.z() + cam.cx;
          const double v = cam.fy * pc.y() / pc.z() + cam.cy;
          CHECK((u >= -margin && u < cam.width + margin && v >= -margin && v < cam.height + margin));
        }
      }

      // The voxel a ray reports is the first non-empty one along it.
      for (std::size_t r = 0; r < t.ray_count(); ++r) {
        std::optional<VoxelKey> first;
        for (const auto& s : t.ray(r)) {
          const VoxelKey k = map.key(c.pose.to_world(s));
          if (map.query_voxel(k) != nullptr) {
            first = k;
            break;
          }
        }
        REQUIRE(first.has_value() == (set.first_hit[r] >= 0));
        if (first) CHECK(set.voxels[set.first_hit[r]].voxel->key == *first);
      }
    }
  }
}

TEST_CASE("property: the template is pose independent") {
  const auto t = build_ray_template(CameraModel{}, 32, 0.5, 30.0, 2.0);
  const auto again = build_ray_template(CameraModel{}, 32, 0.5, 30.0, 2.0);
  const std::vector<Vec3> before(t.samples().begin(), t.samples().end());
  const auto c1 = random_case(1);
  const auto c2 = random_case(2);
  const auto map = map_from(c1.scene.points, 2.0);
  const auto a = query_visible(map, t, c1.pose);
  const auto b = query_visible(map, t, c2.pose);
  CHECK(a.probes > 0);
  CHECK(b.probes > 0);
  REQUIRE(before.size() == t.total_samples());
  CHECK(std::memcmp(before.data(), t.samples().data(), before.size() * sizeof(Vec3)) == 0);
  CHECK(std::memcmp(again.samples().data(), t.samples().data(), before.size() * sizeof(Vec3)) == 0);
}

TEST_CASE("property: recall does not drop as the ray grid gets denser") {
  const CameraModel cam;
  std::vector<double> mean_recall;
  for (const double step : {128.0, 64.0, 32.0, 16.0}) {
    const auto t = build_ray_template(cam, step, 0.5, 30.0, 2.0);
    double sum = 0;
    for (std::uint64_t seed = 200; seed < 210; ++seed) {
      const auto c = random_case(seed);
      const auto map = map_from(c.scene.points, 2.0);
      std::vector<PointId> got;
      for (const auto* p : query_visible(map, t, c.pose, false).points()) got.push_back(p->id);
      std::sort(got.begin(), got.end());
      sum += bench::compare_ids(got, brute_force_visible(c.scene, cam, c.pose, 0.5, 30.0)).recall;
    }
    mean_recall.push_back(sum / 10);
  }
  MESSAGE("mean recall at steps 128/64/32/16: " << mean_recall[0] << ' ' << mean_recall[1] << ' '
                                                << mean_recall[2] << ' ' << mean_recall[3]);
  for (std::size_t i = 1; i < mean_recall.size(); ++i) CHECK(mean_recall[i] >= mean_recall[i - 1]);
}

TEST_CASE("write_visible_csv") {
  std::vector<MapPoint> points = {{5, Vec3(0.5, 0.5, 10.5), {}}};
  const auto map = map_from(points, 2.0);
  const auto t = build_ray_template(one_pixel_camera(), 1.0, 1.0, 20.0, 2.0);
  const auto set = query_visible(map, t, Pose{}, true);
  std::ostringstream out;
  write_visible_csv(out, set, Pose{});
  CHECK(out.str() == "ray_id,voxel_ix,voxel_iy,voxel_iz,point_id,depth\n0,0,0,5,5,10.5\n");
}
