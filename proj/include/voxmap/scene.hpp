#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "voxmap/camera.hpp"
#include "voxmap/voxel_map.hpp"

namespace voxmap {

/// Stateless generator: the value depends only on (seed, stream, index), so
/// any subset of points can be produced independently and in any order.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
/// Uniform in [0, 1).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Vertical strip in the plane y = 0, x in [0, length_m], z in [0, height_m].
struct WallParams {
  double length_m = 100.0;
  std::size_t n_points = 1000;
  double height_m = 4.0;

  friend bool operator==(const WallParams&, const WallParams&) = default;
};

/// U-shaped corridor seen from above. Leg A runs along +x on the spine y = 0,
/// the bend at x = leg_length_m connects it to leg B on the spine
/// y = separation_m running back along -x. Walls are vertical, height_m tall,
/// with density_pts_per_m points per meter of wall length.
struct CorridorParams {
  double leg_length_m = 60.0;
  double width_m = 6.0;
  double separation_m = 12.0;
  double height_m = 4.0;
  double density_pts_per_m = 10.0;
  double camera_height_m = 2.0;
  /// The turn pose sits this far before the bend on leg A ...
  double turn_offset_m = 8.0;
  /// ... looking this many degrees from +x towards +y.
  double turn_heading_deg = 60.0;

  void validate() const;
  friend bool operator==(const CorridorParams&, const CorridorParams&) = default;
};

/// Uniform scatter in an axis-aligned cube.
struct RandomBoxParams {
  Vec3 center = Vec3::Zero();
  double extent_m = 30.0;
  std::size_t count = 4000;

  friend bool operator==(const RandomBoxParams&, const RandomBoxParams&) = default;
};

using SceneGenerator = std::variant<WallParams, CorridorParams, RandomBoxParams>;

/// Segment labels of corridor points.
enum CorridorWall : int {
  kOuterA = 0,
  kInnerA = 1,  // near face at the turn pose
  kSeparatorEnd = 2,
  kInnerB = 3,  // hidden behind the separator at the turn pose
  kOuterB = 4,
  kEndWall = 5,
};

inline bool is_far_wall(int label) { return label == kInnerB || label == kOuterB; }

struct Scene {
  std::vector<MapPoint> points;
  /// Per-point generator label (corridor wall id; 0 for other scenes).
  std::vector<int> labels;
  SceneGenerator generator;
  std::uint64_t seed = 0;
};

/// Jittered-stratified along x so density is the same for every length with
/// n_points proportional to length; a shorter wall's points are a prefix of a
/// longer wall's at equal density and seed.
Scene make_wall_scene(double length_m, std::size_t n_points, std::uint64_t seed,
                      double height_m = 4.0);
Scene make_corridor_scene(const CorridorParams& params, std::uint64_t seed);
Scene make_random_box_scene(const RandomBoxParams& params, std::uint64_t seed);
Scene make_scene(const SceneGenerator& generator, std::uint64_t seed);

struct WallSegment {
  double x0, y0, x1, y1;  // top-view endpoints
  double height;
  int label;
};

std::vector<WallSegment> corridor_segments(const CorridorParams& params);

struct LineParallelToWall {
  double offset_m = 5.0;
  std::size_t n_poses = 10;
  /// Poses are spread evenly over x in [0, span_m].
  double span_m = 100.0;
  double camera_height_m = 2.0;
};
struct CorridorTurn {
  std::size_t n_poses = 20;
};
struct OrbitBox {
  double radius_m = 32.0;
  std::size_t n_poses = 10;
};

using TrajectoryDescription = std::variant<LineParallelToWall, CorridorTurn, OrbitBox>;

struct Trajectory {
  std::vector<Pose> poses;
  TrajectoryDescription description;
};

/// Cameras at y = -offset facing the wall (+y).
Trajectory make_wall_trajectory(const LineParallelToWall& desc);

/// Along the corridor spine: leg A, rotation in place through the turn pose,
/// the bend, leg B. Poses are spaced evenly in path length, counting rotation
/// as 2 m per radian.
Trajectory make_corridor_trajectory(const CorridorParams& params, std::size_t n_poses);
Pose corridor_turn_pose(const CorridorParams& params);

/// `n` poses at uniform arc length along the corridor spine, each looking
/// along its spine segment. Used to place baseline keyframes.
std::vector<Pose> corridor_spine_poses(const CorridorParams& params, std::size_t n);

/// Cameras on a sphere around the box (elevation within +-30 deg) aimed near
/// its center.
Trajectory make_orbit_trajectory(const RandomBoxParams& box, const OrbitBox& desc,
                                 std::uint64_t seed);

/// Number of pixel rays (every `pixel_step` px) at `pose` that cross the near
/// wall inside [d_min, d_max] and then a far wall. Zero means the corridor
/// cannot exercise occlusion from that pose.
std::size_t corridor_occluded_ray_count(const CorridorParams& params, const CameraModel& cam,
                                        const Pose& pose, double d_min, double d_max,
                                        double pixel_step = 8.0);

/// True if the segment from the camera center to `point` passes through the
/// near-wall rectangle before reaching the point.
bool occluded_by_near_wall(const CorridorParams& params, const Pose& pose, const Vec3& point);

/// Exhaustive per-point frustum test; ids sorted ascending.
std::vector<PointId> brute_force_visible(const Scene& scene, const CameraModel& cam,
                                         const Pose& pose, double d_min, double d_max);

/// Writes `<path>` (point file) and `<path>.json` (generator, seed and labels).
void save_scene(const std::string& path, const Scene& scene, double voxel_size = 2.0,
                std::size_t table_size_n = 100003);
Scene load_scene(const std::string& path);

}  // namespace voxmap
