#include "voxmap/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>

#include <json.hpp>

#include "voxmap/snapshot.hpp"

namespace voxmap {

namespace {

constexpr std::uint64_t kStreamX = 1;
constexpr std::uint64_t kStreamY = 2;
constexpr std::uint64_t kStreamZ = 3;
constexpr std::uint64_t kStreamDescription = 7;
constexpr std::uint64_t kStreamPose = 1000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::vector<std::uint8_t> pseudo_descriptor(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t h = counter_hash(seed, kStreamDescription, index);
  std::vector<std::uint8_t> d(8);
  for (int b = 0; b < 8; ++b) d[b] = static_cast<std::uint8_t>(h >> (8 * b));
  return d;
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

Vec3 heading_dir(double heading_rad) { return {std::cos(heading_rad), std::sin(heading_rad), 0.0}; }

// Distance along `dir` (in units of |dir|) at which the ray from `origin` meets
// the vertical wall rectangle, if it does.
std::optional<double> ray_wall_hit(const Vec3& origin, const Vec3& dir, const WallSegment& w) {
  const double ex = w.x1 - w.x0;
  const double ey = w.y1 - w.y0;
  const double denom = dir.x() * ey - dir.y() * ex;
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double ox = w.x0 - origin.x();
  const double oy = w.y0 - origin.y();
  const double t = (ox * ey - oy * ex) / denom;
  const double s = (ox * dir.y() - oy * dir.x()) / denom;
  if (t <= 0.0 || s < 0.0 || s > 1.0) return std::nullopt;
  const double z = origin.z() + t * dir.z();
  if (z < 0.0 || z > w.height) return std::nullopt;
  return t;
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return static_cast<double>(counter_hash(seed, stream, index) >> 11) * 0x1.0p-53;
}

void CorridorParams::validate() const {
  if (!(leg_length_m > 0 && width_m > 0 && height_m > 0 && density_pts_per_m >= 0)) {
    throw ValidationError("corridor: dimensions must be positive");
  }
  if (!(separation_m > width_m)) throw ValidationError("corridor: separation_m must exceed width_m");
  if (!(turn_offset_m >= 0 && turn_offset_m < leg_length_m)) {
    throw ValidationError("corridor: turn_offset_m must lie within leg A");
  }
}

Scene make_wall_scene(double length_m, std::size_t n_points, std::uint64_t seed, double height_m) {
  if (!(length_m > 0.0)) throw ValidationError("wall: length_m must be > 0");
  if (!(height_m > 0.0)) throw ValidationError("wall: height_m must be > 0");
  Scene scene;
  scene.generator = WallParams{length_m, n_points, height_m};
  scene.seed = seed;
  scene.points.reserve(n_points);
  const double pitch = length_m / static_cast<double>(std::max<std::size_t>(n_points, 1));
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = (static_cast<double>(i) + counter_uniform(seed, kStreamX, i)) * pitch;
    const double z = counter_uniform(seed, kStreamZ, i) * height_m;
    scene.points.push_back({i, Vec3(std::min(x, length_m), 0.0, z), pseudo_descriptor(seed, i)});
  }
  scene.labels.assign(n_points, 0);
  return scene;
}

std::vector<WallSegment> corridor_segments(const CorridorParams& p) {
  const double h = p.width_m / 2.0;
  const double L = p.leg_length_m;
  const double s = p.separation_m;
  return {
      {0.0, -h, L + h, -h, p.height_m, kOuterA},
      {0.0, h, L - h, h, p.height_m, kInnerA},
      {L - h, h, L - h, s - h, p.height_m, kSeparatorEnd},
      {0.0, s - h, L - h, s - h, p.height_m, kInnerB},
      {0.0, s + h, L + h, s + h, p.height_m, kOuterB},
      {L + h, -h, L + h, s + h, p.height_m, kEndWall},
  };
}

Scene make_corridor_scene(const CorridorParams& params, std::uint64_t seed) {
  params.validate();
  Scene scene;
  scene.generator = params;
  scene.seed = seed;
  PointId id = 0;
  for (const auto& w : corridor_segments(params)) {
    const double len = std::hypot(w.x1 - w.x0, w.y1 - w.y0);
    const auto n = static_cast<std::size_t>(std::llround(len * params.density_pts_per_m));
    const std::uint64_t base = 16 + 4 * static_cast<std::uint64_t>(w.label);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (static_cast<double>(i) + counter_uniform(seed, base + kStreamX, i)) /
                       static_cast<double>(n);
      const double z = counter_uniform(seed, base + kStreamZ, i) * w.height;
      const Vec3 pos(w.x0 + s * (w.x1 - w.x0), w.y0 + s * (w.y1 - w.y0), z);
      scene.points.push_back({id, pos, pseudo_descriptor(seed, id)});
      scene.labels.push_back(w.label);
      ++id;
    }
  }
  return scene;
}

Scene make_random_box_scene(const RandomBoxParams& params, std::uint64_t seed) {
  if (!(params.extent_m > 0.0)) throw ValidationError("random box: extent_m must be > 0");
  Scene scene;
  scene.generator = params;
  scene.seed = seed;
  scene.points.reserve(params.count);
  for (std::size_t i = 0; i < params.count; ++i) {
    const Vec3 u(counter_uniform(seed, kStreamX, i), counter_uniform(seed, kStreamY, i),
                 counter_uniform(seed, kStreamZ, i));
    const Vec3 pos = params.center + (u.array() - 0.5).matrix() * params.extent_m;
    scene.points.push_back({i, pos, pseudo_descriptor(seed, i)});
  }
  scene.labels.assign(params.count, 0);
  return scene;
}

Scene make_scene(const SceneGenerator& generator, std::uint64_t seed) {
  return std::visit(
      [&](const auto& g) -> Scene {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, WallParams>) {
          return make_wall_scene(g.length_m, g.n_points, seed, g.height_m);
        } else if constexpr (std::is_same_v<T, CorridorParams>) {
          return make_corridor_scene(g, seed);
        } else {
          return make_random_box_scene(g, seed);
        }
      },
      generator);
}

Trajectory make_wall_trajectory(const LineParallelToWall& desc) {
  Trajectory traj;
  traj.description = desc;
  for (std::size_t k = 0; k < desc.n_poses; ++k) {
    const double x = desc.span_m * (static_cast<double>(k) + 0.5) / static_cast<double>(desc.n_poses);
    traj.poses.push_back(
        Pose::looking_along(Vec3(x, -desc.offset_m, desc.camera_height_m), Vec3::UnitY()));
  }
  return traj;
}

Pose corridor_turn_pose(const CorridorParams& p) {
  return Pose::looking_along(
      Vec3(p.leg_length_m - p.turn_offset_m, 0.0, p.camera_height_m),
      heading_dir(deg2rad(p.turn_heading_deg)));
}

Trajectory make_corridor_trajectory(const CorridorParams& p, std::size_t n_poses) {
  p.validate();
  struct Waypoint {
    double x, y, heading;
  };
  const double L = p.leg_length_m;
  const double xt = L - p.turn_offset_m;
  const double q = std::numbers::pi / 2.0;
  const std::vector<Waypoint> wps = {
      {0.0, 0.0, 0.0},
      {xt, 0.0, 0.0},
      {xt, 0.0, deg2rad(p.turn_heading_deg)},
      {xt, 0.0, q},
      {L, 0.0, q},
      {L, p.separation_m, q},
      {L, p.separation_m, 2 * q},
      {0.0, p.separation_m, 2 * q},
  };
  constexpr double kMetersPerRadian = 2.0;
  std::vector<double> cost(wps.size(), 0.0);
  for (std::size_t i = 1; i < wps.size(); ++i) {
    cost[i] = cost[i - 1] + std::hypot(wps[i].x - wps[i - 1].x, wps[i].y - wps[i - 1].y) +
              kMetersPerRadian * std::abs(wps[i].heading - wps[i - 1].heading);
  }
  Trajectory traj;
  traj.description = CorridorTurn{n_poses};
  for (std::size_t k = 0; k < n_poses; ++k) {
    const double c = n_poses == 1 ? 0.0 : cost.back() * k / static_cast<double>(n_poses - 1);
    std::size_t seg = 1;
    while (seg + 1 < wps.size() && cost[seg] < c) ++seg;
    const double len = cost[seg] - cost[seg - 1];
    const double a = len > 0 ? std::clamp((c - cost[seg - 1]) / len, 0.0, 1.0) : 1.0;
    const auto& w0 = wps[seg - 1];
    const auto& w1 = wps[seg];
    const Vec3 pos(w0.x + a * (w1.x - w0.x), w0.y + a * (w1.y - w0.y), p.camera_height_m);
    traj.poses.push_back(
        Pose::looking_along(pos, heading_dir(w0.heading + a * (w1.heading - w0.heading))));
  }
  return traj;
}

std::vector<Pose> corridor_spine_poses(const CorridorParams& p, std::size_t n) {
  p.validate();
  const double L = p.leg_length_m;
  const double S = p.separation_m;
  const double total = 2.0 * L + S;
  std::vector<Pose> poses;
  poses.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = total * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    Vec3 pos;
    Vec3 forward;
    if (s < L) {
      pos = {s, 0.0, p.camera_height_m};
      forward = Vec3::UnitX();
    } else if (s < L + S) {
      pos = {L, s - L, p.camera_height_m};
      forward = Vec3::UnitY();
    } else {
      pos = {L - (s - L - S), S, p.camera_height_m};
      forward = -Vec3::UnitX();
    }
    poses.push_back(Pose::looking_along(pos, forward));
  }
  return poses;
}

Trajectory make_orbit_trajectory(const RandomBoxParams& box, const OrbitBox& desc,
                                 std::uint64_t seed) {
  Trajectory traj;
  traj.description = desc;
  const double max_elev = deg2rad(30.0);
  for (std::size_t k = 0; k < desc.n_poses; ++k) {
    auto u = [&](std::uint64_t axis) { return counter_uniform(seed, kStreamPose + axis, k); };
    const double az = 2.0 * std::numbers::pi * u(0);
    const double el = (2.0 * u(1) - 1.0) * max_elev;
    const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    const Vec3 pos = box.center + desc.radius_m * dir;
    const Vec3 target =
        box.center + 0.2 * box.extent_m * Vec3(u(2) - 0.5, u(3) - 0.5, u(4) - 0.5);
    traj.poses.push_back(Pose::looking_along(pos, target - pos));
  }
  return traj;
}

std::size_t corridor_occluded_ray_count(const CorridorParams& params, const CameraModel& cam,
                                        const Pose& pose, double d_min, double d_max,
                                        double pixel_step) {
  const auto walls = corridor_segments(params);
  const Vec3& origin = pose.translation();
  std::size_t count = 0;
  for (double v = pixel_step / 2; v < cam.height; v += pixel_step) {
    for (double u = pixel_step / 2; u < cam.width; u += pixel_step) {
      // Unit z-depth direction, so hit distances are depths.
      const Vec3 dir = pose.rotation() * cam.backproject(u, v, 1.0);
      std::optional<double> near, far;
      for (const auto& w : walls) {
        const auto t = ray_wall_hit(origin, dir, w);
        if (!t) continue;
        if (w.label == kInnerA) near = t;
        if (is_far_wall(w.label) && (!far || *t < *far)) far = t;
      }
      if (near && far && *near >= d_min && *near < *far && *far <= d_max) ++count;
    }
  }
  return count;
}

bool occluded_by_near_wall(const CorridorParams& params, const Pose& pose, const Vec3& point) {
  const Vec3& origin = pose.translation();
  const Vec3 dir = point - origin;
  for (const auto& w : corridor_segments(params)) {
    if (w.label != kInnerA) continue;
    const auto t = ray_wall_hit(origin, dir, w);
    if (t && *t < 1.0 - 1e-9) return true;
  }
  return false;
}

std::vector<PointId> brute_force_visible(const Scene& scene, const CameraModel& cam,
                                         const Pose& pose, double d_min, double d_max) {
  std::vector<PointId> ids;
  for (const auto& p : scene.points) {
    if (in_frustum(cam, pose, p.position, d_min, d_max)) ids.push_back(p.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ---- persistence ----------------------------------------------------------

namespace {

using nlohmann::json;

json generator_to_json(const SceneGenerator& g) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, WallParams>) {
          return {{"kind", "wall"},
                  {"length_m", p.length_m},
                  {"n_points", p.n_points},
                  {"height_m", p.height_m}};
        } else if constexpr (std::is_same_v<T, CorridorParams>) {
          return {{"kind", "corridor"},
                  {"leg_length_m", p.leg_length_m},
                  {"width_m", p.width_m},
                  {"separation_m", p.separation_m},
                  {"height_m", p.height_m},
                  {"density_pts_per_m", p.density_pts_per_m},
                  {"camera_height_m", p.camera_height_m},
                  {"turn_offset_m", p.turn_offset_m},
                  {"turn_heading_deg", p.turn_heading_deg}};
        } else {
          return {{"kind", "random_box"},
                  {"center", {p.center.x(), p.center.y(), p.center.z()}},
                  {"extent_m", p.extent_m},
                  {"count", p.count}};
        }
      },
      g);
}

SceneGenerator generator_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "wall") {
    return WallParams{j.at("length_m").get<double>(), j.at("n_points").get<std::size_t>(),
                      j.at("height_m").get<double>()};
  }
  if (kind == "corridor") {
    CorridorParams p;
    p.leg_length_m = j.at("leg_length_m").get<double>();
    p.width_m = j.at("width_m").get<double>();
    p.separation_m = j.at("separation_m").get<double>();
    p.height_m = j.at("height_m").get<double>();
    p.density_pts_per_m = j.at("density_pts_per_m").get<double>();
    p.camera_height_m = j.at("camera_height_m").get<double>();
    p.turn_offset_m = j.at("turn_offset_m").get<double>();
    p.turn_heading_deg = j.at("turn_heading_deg").get<double>();
    return p;
  }
  if (kind == "random_box") {
    RandomBoxParams p;
    const auto c = j.at("center").get<std::vector<double>>();
    if (c.size() != 3) throw ValidationError("scene sidecar: center needs 3 values");
    p.center = Vec3(c[0], c[1], c[2]);
    p.extent_m = j.at("extent_m").get<double>();
    p.count = j.at("count").get<std::size_t>();
    return p;
  }
  throw ValidationError("scene sidecar: unknown generator kind '" + kind + "'");
}

}  // namespace

void save_scene(const std::string& path, const Scene& scene, double voxel_size,
                std::size_t table_size_n) {
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_points(out, voxel_size, table_size_n, scene.points);
  }
  const json sidecar = {{"format", "voxmap-scene-v1"},
                        {"seed", scene.seed},
                        {"generator", generator_to_json(scene.generator)},
                        {"labels", scene.labels}};
  std::ofstream out(path + ".json");
  if (!out) throw std::runtime_error("cannot open '" + path + ".json' for writing");
  out << sidecar.dump(2) << '\n';
}

Scene load_scene(const std::string& path) {
  Scene scene;
  {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    scene.points = read_points(in).points;
  }
  std::ifstream in(path + ".json");
  if (!in) throw std::runtime_error("cannot open '" + path + ".json'");
  json sidecar;
  try {
    sidecar = json::parse(in);
    if (sidecar.at("format").get<std::string>() != "voxmap-scene-v1") {
      throw ValidationError("scene sidecar: unsupported format");
    }
    scene.seed = sidecar.at("seed").get<std::uint64_t>();
    scene.generator = generator_from_json(sidecar.at("generator"));
    scene.labels = sidecar.at("labels").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scene sidecar: ") + e.what());
  }
  if (scene.labels.size() != scene.points.size()) {
    throw ValidationError("scene sidecar: label count does not match point count");
  }
  return scene;
}

}  // namespace voxmap
