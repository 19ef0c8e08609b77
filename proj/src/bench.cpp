#include "voxmap/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "voxmap/frustum_query.hpp"
#include "voxmap/keyframe_map.hpp"
#include "voxmap/voxel_map.hpp"

namespace voxmap::bench {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Scaling: return "scaling";
    case Experiment::Occlusion: return "occlusion";
    case Experiment::VoxelSweep: return "voxel-sweep";
    case Experiment::Recall: return "recall";
  }
  return "?";
}

Experiment parse_experiment(const std::string& name) {
  if (name == "scaling") return Experiment::Scaling;
  if (name == "occlusion") return Experiment::Occlusion;
  if (name == "voxel-sweep" || name == "voxel-size-sweep") return Experiment::VoxelSweep;
  if (name == "recall") return Experiment::Recall;
  throw ValidationError("unknown experiment '" + name + "'");
}

// ---- config -----------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d)) {
    throw ValidationError("config key '" + key + "': expected a non-negative integer, got '" + v +
                          "'");
  }
  return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::vector<std::size_t> to_counts(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(v)) out.push_back(to_count(key, item));
  return out;
}

using Setter = std::function<void(BenchConfig&, const std::string& key, const std::string& v)>;

template <typename T, typename Conv>
Setter field(T BenchConfig::*member, Conv conv) {
  return [member, conv](BenchConfig& c, const std::string& k, const std::string& v) {
    c.*member = conv(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment", [](BenchConfig& c, const std::string&,
                        const std::string& v) { c.experiment = parse_experiment(v); }},
      {"repeats", field(&BenchConfig::repeats, to_count)},
      {"inner_iterations", field(&BenchConfig::inner_iterations, to_count)},
      {"warmup", field(&BenchConfig::warmup, to_count)},
      {"seed", [](BenchConfig& c, const std::string& k,
                  const std::string& v) { c.seed = static_cast<std::uint64_t>(to_count(k, v)); }},
      {"camera.fx", [](BenchConfig& c, const std::string& k,
                       const std::string& v) { c.camera.fx = to_double(k, v); }},
      {"camera.fy", [](BenchConfig& c, const std::string& k,
                       const std::string& v) { c.camera.fy = to_double(k, v); }},
      {"camera.cx", [](BenchConfig& c, const std::string& k,
                       const std::string& v) { c.camera.cx = to_double(k, v); }},
      {"camera.cy", [](BenchConfig& c, const std::string& k,
                       const std::string& v) { c.camera.cy = to_double(k, v); }},
      {"camera.width", [](BenchConfig& c, const std::string& k,
                          const std::string& v) { c.camera.width = static_cast<int>(to_count(k, v)); }},
      {"camera.height", [](BenchConfig& c, const std::string& k, const std::string& v) {
         c.camera.height = static_cast<int>(to_count(k, v));
       }},
      {"grid_step", field(&BenchConfig::grid_step, to_double)},
      {"d_min", field(&BenchConfig::d_min, to_double)},
      {"d_max", field(&BenchConfig::d_max, to_double)},
      {"voxel_size", field(&BenchConfig::voxel_size, to_double)},
      {"table_size_n", field(&BenchConfig::table_size_n, to_count)},
      {"max_points_per_kf", field(&BenchConfig::max_points_per_kf, to_count)},
      {"wall_lengths", field(&BenchConfig::wall_lengths, to_doubles)},
      {"wall_points", field(&BenchConfig::wall_points, to_counts)},
      {"wall_height", field(&BenchConfig::wall_height, to_double)},
      {"wall_offset", field(&BenchConfig::wall_offset, to_double)},
      {"query_poses", field(&BenchConfig::query_poses, to_count)},
      {"trajectory_span", field(&BenchConfig::trajectory_span, to_double)},
      {"scaling_first_hit", field(&BenchConfig::scaling_first_hit, to_bool)},
      {"corridor.leg_length", [](BenchConfig& c, const std::string& k,
                                 const std::string& v) { c.corridor.leg_length_m = to_double(k, v); }},
      {"corridor.width", [](BenchConfig& c, const std::string& k,
                            const std::string& v) { c.corridor.width_m = to_double(k, v); }},
      {"corridor.separation", [](BenchConfig& c, const std::string& k,
                                 const std::string& v) { c.corridor.separation_m = to_double(k, v); }},
      {"corridor.height", [](BenchConfig& c, const std::string& k,
                             const std::string& v) { c.corridor.height_m = to_double(k, v); }},
      {"corridor.density", [](BenchConfig& c, const std::string& k, const std::string& v) {
         c.corridor.density_pts_per_m = to_double(k, v);
       }},
      {"corridor.camera_height", [](BenchConfig& c, const std::string& k, const std::string& v) {
         c.corridor.camera_height_m = to_double(k, v);
       }},
      {"corridor.turn_offset", [](BenchConfig& c, const std::string& k,
                                  const std::string& v) { c.corridor.turn_offset_m = to_double(k, v); }},
      {"corridor.turn_heading_deg", [](BenchConfig& c, const std::string& k, const std::string& v) {
         c.corridor.turn_heading_deg = to_double(k, v);
       }},
      {"voxel_sizes", field(&BenchConfig::voxel_sizes, to_doubles)},
      {"box.extent", [](BenchConfig& c, const std::string& k,
                        const std::string& v) { c.box.extent_m = to_double(k, v); }},
      {"box.count", [](BenchConfig& c, const std::string& k,
                       const std::string& v) { c.box.count = to_count(k, v); }},
      {"box.center", [](BenchConfig& c, const std::string& k, const std::string& v) {
         const auto xyz = to_doubles(k, v);
         if (xyz.size() != 3) throw ValidationError("config key 'box.center': expected 3 values");
         c.box.center = Vec3(xyz[0], xyz[1], xyz[2]);
       }},
      {"orbit_radius", field(&BenchConfig::orbit_radius, to_double)},
      {"sweep_poses", field(&BenchConfig::sweep_poses, to_count)},
      {"sweep_first_hit", field(&BenchConfig::sweep_first_hit, to_bool)},
      {"recall_trials", field(&BenchConfig::recall_trials, to_count)},
      {"recall_grid_steps", field(&BenchConfig::recall_grid_steps, to_doubles)},
      {"recall_first_hit", field(&BenchConfig::recall_first_hit, to_bool)},
      {"max_voxel_time_ratio", field(&BenchConfig::max_voxel_time_ratio, to_double)},
      {"min_keyframe_time_ratio", field(&BenchConfig::min_keyframe_time_ratio, to_double)},
      {"min_recall", field(&BenchConfig::min_recall, to_double)},
  };
  return table;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError("config field '" + field + "': " + what);
}

}  // namespace

void BenchConfig::validate() const {
  require(repeats >= 1, "repeats", "must be >= 1");
  require(inner_iterations >= 1, "inner_iterations", "must be >= 1");
  try {
    camera.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config field 'camera': ") + e.what());
  }
  require(grid_step >= 1.0, "grid_step", "must be >= 1");
  require(d_min > 0.0 && d_min < d_max, "d_min", "need 0 < d_min < d_max");
  require(voxel_size > 0.0, "voxel_size", "must be > 0");
  require(table_size_n >= 1, "table_size_n", "must be >= 1");
  require(max_points_per_kf >= 1, "max_points_per_kf", "must be >= 1");
  require(wall_lengths.size() == wall_points.size(), "wall_points",
          "must have as many entries as wall_lengths");
  require(!wall_lengths.empty(), "wall_lengths", "must not be empty");
  for (const double l : wall_lengths) require(l > 0.0, "wall_lengths", "entries must be > 0");
  require(wall_height > 0.0, "wall_height", "must be > 0");
  require(query_poses >= 1, "query_poses", "must be >= 1");
  require(trajectory_span >= 0.0, "trajectory_span", "must be >= 0");
  try {
    corridor.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config field 'corridor': ") + e.what());
  }
  require(!voxel_sizes.empty(), "voxel_sizes", "must not be empty");
  for (const double s : voxel_sizes) require(s > 0.0, "voxel_sizes", "entries must be > 0");
  require(box.extent_m > 0.0, "box.extent", "must be > 0");
  require(orbit_radius > 0.0, "orbit_radius", "must be > 0");
  require(sweep_poses >= 1, "sweep_poses", "must be >= 1");
  require(recall_trials >= 1, "recall_trials", "must be >= 1");
  require(!recall_grid_steps.empty(), "recall_grid_steps", "must not be empty");
  for (const double g : recall_grid_steps) require(g >= 1.0, "recall_grid_steps", "entries must be >= 1");
}

BenchConfig parse_config(std::istream& in, BenchConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ValidationError("config: unknown key '" + key + "'");
    it->second(base, key, value);
  }
  return base;
}

BenchConfig load_config(const std::string& path, BenchConfig base) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

// ---- output -------------------------------------------------------------------

namespace {

template <typename T>
std::string opt(const std::optional<T>& v) {
  if (!v) return {};
  std::ostringstream ss;
  ss << std::setprecision(10) << *v;
  return ss.str();
}

std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kRecordCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.experiment << ',' << r.map_kind << ',' << r.map_size << ',' << opt(r.voxel_size) << ','
        << num(r.median_ns) << ',' << num(r.mean_ns) << ',' << opt(r.probes) << ','
        << opt(r.keyframes_scanned) << ',' << opt(r.recall) << ',' << opt(r.precision) << ','
        << opt(r.occluded_returned) << '\n';
  }
}

void write_records_gnuplot(std::ostream& out, const std::vector<BenchRecord>& records) {
  std::vector<std::string> kinds;
  for (const auto& r : records) {
    if (std::find(kinds.begin(), kinds.end(), r.map_kind) == kinds.end()) kinds.push_back(r.map_kind);
  }
  auto na = [](const auto& v) { return v ? opt(v) : std::string("NaN"); };
  bool first = true;
  for (const auto& kind : kinds) {
    if (!first) out << "\n\n";
    first = false;
    out << "# map_kind=" << kind << '\n'
        << "# map_size voxel_size median_ns mean_ns probes keyframes_scanned recall precision\n";
    for (const auto& r : records) {
      if (r.map_kind != kind) continue;
      out << r.map_size << ' ' << na(r.voxel_size) << ' ' << num(r.median_ns) << ' '
          << num(r.mean_ns) << ' ' << na(r.probes) << ' ' << na(r.keyframes_scanned) << ' '
          << na(r.recall) << ' ' << na(r.precision) << '\n';
    }
  }
}

Fidelity compare_ids(const std::vector<PointId>& returned, const std::vector<PointId>& truth) {
  std::vector<PointId> common;
  std::set_intersection(returned.begin(), returned.end(), truth.begin(), truth.end(),
                        std::back_inserter(common));
  Fidelity f;
  if (!truth.empty()) f.recall = static_cast<double>(common.size()) / truth.size();
  if (!returned.empty()) f.precision = static_cast<double>(common.size()) / returned.size();
  return f;
}

// ---- experiments --------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

TimingStats summarize(std::vector<double> samples) {
  TimingStats t;
  t.per_repeat_ns = samples;
  if (samples.empty()) return t;
  t.mean_ns = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  t.median_ns = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  return t;
}

// Wall time per query: warm-up passes are discarded, then each repeat times
// `inner_iterations` passes over all queries.
TimingStats time_per_query(const BenchConfig& c, std::size_t n_queries,
                           const std::function<std::size_t()>& run_all) {
  volatile std::size_t sink = 0;
  for (std::size_t w = 0; w < c.warmup; ++w) sink = sink + run_all();
  std::vector<double> per_query;
  for (std::size_t r = 0; r < c.repeats; ++r) {
    const auto start = Clock::now();
    for (std::size_t i = 0; i < c.inner_iterations; ++i) sink = sink + run_all();
    const auto ns = std::chrono::duration<double, std::nano>(Clock::now() - start).count();
    per_query.push_back(ns / static_cast<double>(c.inner_iterations * std::max<std::size_t>(n_queries, 1)));
  }
  return summarize(per_query);
}

VoxelMap build_voxel_map(const std::vector<MapPoint>& points, double voxel_size,
                         std::size_t table_size_n) {
  VoxelMapConfig mc;
  mc.voxel_size = voxel_size;
  mc.table_size_n = table_size_n;
  VoxelMap map(mc);
  for (const auto& p : points) map.insert_point(p);
  return map;
}

std::vector<PointId> ids_of(const VisibleSet& set) {
  std::vector<PointId> ids;
  for (const auto* p : set.points()) ids.push_back(p->id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<PointId> ids_of(const KeyframeQueryResult& r) {
  std::vector<PointId> ids;
  for (const auto* p : r.points) ids.push_back(p->id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

std::vector<Pose> wall_keyframe_poses(double length, std::size_t n_kf, double offset,
                                      double height) {
  std::vector<Pose> poses;
  for (std::size_t k = 0; k < n_kf; ++k) {
    const double x = length * (static_cast<double>(k) + 0.5) / static_cast<double>(n_kf);
    poses.push_back(Pose::looking_along(Vec3(x, -offset, height), Vec3::UnitY()));
  }
  return poses;
}

std::size_t keyframes_needed(std::size_t n_points, std::size_t cap) {
  return std::max<std::size_t>(1, (n_points + cap - 1) / cap);
}

struct VoxelKeyHasher {
  std::size_t operator()(const VoxelKey& k) const {
    return static_cast<std::size_t>(k.ix * 73856093LL ^ k.iy * 19349663LL ^ k.iz * 83492791LL);
  }
};

// Keys of non-empty voxels that are only ever reached behind a different
// non-empty voxel, by any template ray at `pose`. Computed by walking every
// ray directly against the map.
std::unordered_map<VoxelKey, bool, VoxelKeyHasher> ray_occlusion(const VoxelMap& map,
                                                                 const RayTemplate& tmpl,
                                                                 const Pose& pose) {
  std::unordered_map<VoxelKey, bool, VoxelKeyHasher> occluded_everywhere;
  for (std::size_t ray = 0; ray < tmpl.ray_count(); ++ray) {
    std::optional<VoxelKey> first;
    for (const Vec3& sc : tmpl.ray(ray)) {
      const VoxelKey key = map.key(pose.to_world(sc));
      if (map.query_voxel(key) == nullptr) continue;
      if (!first) first = key;
      const bool occluded_here = *first != key;
      auto [it, inserted] = occluded_everywhere.try_emplace(key, occluded_here);
      if (!inserted) it->second = it->second && occluded_here;
    }
  }
  return occluded_everywhere;
}

}  // namespace

ScalingResult run_scaling(const BenchConfig& c) {
  c.validate();
  ScalingResult out;
  const double span = c.trajectory_span > 0.0
                          ? c.trajectory_span
                          : *std::min_element(c.wall_lengths.begin(), c.wall_lengths.end());
  const auto traj = make_wall_trajectory({c.wall_offset, c.query_poses, span, c.wall_height / 2.0});
  const auto tmpl = build_ray_template(c.camera, c.grid_step, c.d_min, c.d_max, c.voxel_size);
  out.template_samples = tmpl.total_samples();

  for (std::size_t i = 0; i < c.wall_lengths.size(); ++i) {
    const double length = c.wall_lengths[i];
    const Scene scene = make_wall_scene(length, c.wall_points[i], c.seed, c.wall_height);
    const VoxelMap vmap = build_voxel_map(scene.points, c.voxel_size, c.table_size_n);
    const auto kf_poses = wall_keyframe_poses(
        length, keyframes_needed(scene.points.size(), c.max_points_per_kf), c.wall_offset,
        c.wall_height / 2.0);
    const auto kmap =
        KeyframeMap::build_from_scene(scene.points, kf_poses, c.camera, c.max_points_per_kf);

    std::vector<std::size_t> probes;
    std::vector<double> v_recall, v_precision, k_recall, k_precision, scanned;
    for (const auto& pose : traj.poses) {
      const auto truth = brute_force_visible(scene, c.camera, pose, c.d_min, c.d_max);
      const auto vs = query_visible(vmap, tmpl, pose, c.scaling_first_hit);
      probes.push_back(vs.probes);
      const auto vf = compare_ids(ids_of(vs), truth);
      v_recall.push_back(vf.recall);
      v_precision.push_back(vf.precision);
      const auto ks = query_visible_kf(kmap, pose, c.d_min, c.d_max);
      scanned.push_back(static_cast<double>(ks.keyframes_scanned));
      const auto kf = compare_ids(ids_of(ks), truth);
      k_recall.push_back(kf.recall);
      k_precision.push_back(kf.precision);
    }

    const auto vt = time_per_query(c, traj.poses.size(), [&] {
      std::size_t n = 0;
      for (const auto& pose : traj.poses) {
        n += query_visible(vmap, tmpl, pose, c.scaling_first_hit).voxels.size();
      }
      return n;
    });
    const auto kt = time_per_query(c, traj.poses.size(), [&] {
      std::size_t n = 0;
      for (const auto& pose : traj.poses) {
        n += query_visible_kf(kmap, pose, c.d_min, c.d_max).points.size();
      }
      return n;
    });

    BenchRecord vr;
    vr.experiment = "scaling";
    vr.map_kind = "voxel";
    vr.map_size = scene.points.size();
    vr.voxel_size = c.voxel_size;
    vr.median_ns = vt.median_ns;
    vr.mean_ns = vt.mean_ns;
    vr.probes = mean_of(std::vector<double>(probes.begin(), probes.end()));
    vr.recall = mean_of(v_recall);
    vr.precision = mean_of(v_precision);
    out.records.push_back(vr);

    BenchRecord kr;
    kr.experiment = "scaling";
    kr.map_kind = "keyframe";
    kr.map_size = scene.points.size();
    kr.median_ns = kt.median_ns;
    kr.mean_ns = kt.mean_ns;
    kr.keyframes_scanned = mean_of(scanned);
    kr.recall = mean_of(k_recall);
    kr.precision = mean_of(k_precision);
    out.records.push_back(kr);

    out.voxel_probes.push_back(std::move(probes));
  }
  return out;
}

OcclusionResult run_occlusion(const BenchConfig& c) {
  c.validate();
  OcclusionResult out;
  const auto& params = c.corridor;
  const Scene scene = make_corridor_scene(params, c.seed);
  out.turn_pose = corridor_turn_pose(params);
  const Pose& pose = out.turn_pose;

  out.precondition_rays = corridor_occluded_ray_count(params, c.camera, pose, c.d_min, c.d_max);
  if (out.precondition_rays == 0) {
    throw ValidationError(
        "occlusion: at the turn pose no camera ray crosses the near wall and then a far wall; "
        "adjust corridor.turn_offset / corridor.turn_heading_deg or the depth range");
  }

  std::unordered_map<PointId, int> label_of;
  for (std::size_t i = 0; i < scene.points.size(); ++i) label_of[scene.points[i].id] = scene.labels[i];

  const VoxelMap vmap = build_voxel_map(scene.points, c.voxel_size, c.table_size_n);
  const auto tmpl = build_ray_template(c.camera, c.grid_step, c.d_min, c.d_max, c.voxel_size);
  const auto first_hit = query_visible(vmap, tmpl, pose, true);
  const auto all_samples = query_visible(vmap, tmpl, pose, false);
  const auto kmap = KeyframeMap::build_from_scene(
      scene.points,
      corridor_spine_poses(params, keyframes_needed(scene.points.size(), c.max_points_per_kf)),
      c.camera, c.max_points_per_kf);
  const auto kf = query_visible_kf(kmap, pose, c.d_min, c.d_max);

  const auto occlusion = ray_occlusion(vmap, tmpl, pose);
  auto far_on_occluded_rays = [&](const VisibleSet& set) {
    std::size_t n = 0;
    for (const auto& hit : set.voxels) {
      const auto it = occlusion.find(hit.voxel->key);
      if (it == occlusion.end() || !it->second) continue;
      for (const auto& p : hit.voxel->points) n += is_far_wall(label_of.at(p.id)) ? 1 : 0;
    }
    return n;
  };
  auto far_occluded = [&](const std::vector<const MapPoint*>& points) {
    std::size_t n = 0;
    for (const auto* p : points) {
      if (is_far_wall(label_of.at(p->id)) && occluded_by_near_wall(params, pose, p->position)) ++n;
    }
    return n;
  };
  out.first_hit_far_on_occluded_rays = far_on_occluded_rays(first_hit);
  out.all_samples_far_on_occluded_rays = far_on_occluded_rays(all_samples);
  out.first_hit_far_occluded = far_occluded(first_hit.points());
  out.keyframe_far_occluded = far_occluded(kf.points);
  out.keyframe_far_returned = static_cast<std::size_t>(std::count_if(
      kf.points.begin(), kf.points.end(), [&](const MapPoint* p) { return is_far_wall(label_of.at(p->id)); }));

  const auto truth = brute_force_visible(scene, c.camera, pose, c.d_min, c.d_max);
  auto voxel_record = [&](const VisibleSet& set, bool fh, const char* kind) {
    const auto t = time_per_query(c, 1, [&] { return query_visible(vmap, tmpl, pose, fh).voxels.size(); });
    const auto f = compare_ids(ids_of(set), truth);
    BenchRecord r;
    r.experiment = "occlusion";
    r.map_kind = kind;
    r.map_size = scene.points.size();
    r.voxel_size = c.voxel_size;
    r.median_ns = t.median_ns;
    r.mean_ns = t.mean_ns;
    r.probes = static_cast<double>(set.probes);
    r.recall = f.recall;
    r.precision = f.precision;
    r.occluded_returned = far_occluded(set.points());
    return r;
  };
  out.records.push_back(voxel_record(first_hit, true, "voxel"));
  out.records.push_back(voxel_record(all_samples, false, "voxel-all"));
  {
    const auto t = time_per_query(c, 1, [&] { return query_visible_kf(kmap, pose, c.d_min, c.d_max).points.size(); });
    const auto f = compare_ids(ids_of(kf), truth);
    BenchRecord r;
    r.experiment = "occlusion";
    r.map_kind = "keyframe";
    r.map_size = scene.points.size();
    r.median_ns = t.median_ns;
    r.mean_ns = t.mean_ns;
    r.keyframes_scanned = static_cast<double>(kf.keyframes_scanned);
    r.recall = f.recall;
    r.precision = f.precision;
    r.occluded_returned = out.keyframe_far_occluded;
    out.records.push_back(r);
  }

  std::ostringstream vcsv;
  write_visible_csv(vcsv, first_hit, pose);
  out.voxel_points_csv = vcsv.str();
  std::ostringstream kcsv;
  kcsv << "ray_id,voxel_ix,voxel_iy,voxel_iz,point_id,depth\n";
  for (const auto* p : kf.points) kcsv << ",,,," << p->id << ',' << pose.to_camera(p->position).z() << '\n';
  out.keyframe_points_csv = kcsv.str();
  return out;
}

SweepResult run_voxel_size_sweep(const BenchConfig& c) {
  c.validate();
  SweepResult out;
  const Scene scene = make_random_box_scene(c.box, c.seed);
  const auto traj = make_orbit_trajectory(c.box, {c.orbit_radius, c.sweep_poses}, c.seed);
  std::vector<std::vector<PointId>> truths;
  for (const auto& pose : traj.poses) {
    truths.push_back(brute_force_visible(scene, c.camera, pose, c.d_min, c.d_max));
  }
  for (const double vs : c.voxel_sizes) {
    const VoxelMap vmap = build_voxel_map(scene.points, vs, c.table_size_n);
    const auto tmpl = build_ray_template(c.camera, c.grid_step, c.d_min, c.d_max, vs);
    std::vector<double> recall, precision, probes;
    for (std::size_t k = 0; k < traj.poses.size(); ++k) {
      const auto set = query_visible(vmap, tmpl, traj.poses[k], c.sweep_first_hit);
      const auto f = compare_ids(ids_of(set), truths[k]);
      recall.push_back(f.recall);
      precision.push_back(f.precision);
      probes.push_back(static_cast<double>(set.probes));
    }
    const auto t = time_per_query(c, traj.poses.size(), [&] {
      std::size_t n = 0;
      for (const auto& pose : traj.poses) n += query_visible(vmap, tmpl, pose, c.sweep_first_hit).voxels.size();
      return n;
    });
    BenchRecord r;
    r.experiment = "voxel-sweep";
    r.map_kind = c.sweep_first_hit ? "voxel" : "voxel-all";
    r.map_size = scene.points.size();
    r.voxel_size = vs;
    r.median_ns = t.median_ns;
    r.mean_ns = t.mean_ns;
    r.probes = mean_of(probes);
    r.recall = mean_of(recall);
    r.precision = mean_of(precision);
    out.records.push_back(r);
  }
  return out;
}

RecallResult run_recall(const BenchConfig& c) {
  c.validate();
  RecallResult out;
  const auto& cam = c.camera;
  const double margin = c.voxel_size * std::max(cam.fx, cam.fy) / c.d_min;
  for (const double step : c.recall_grid_steps) {
    const auto tmpl = build_ray_template(cam, step, c.d_min, c.d_max, c.voxel_size);
    std::vector<RecallTrial> trials;
    std::vector<double> times, recall, precision, probes;
    for (std::size_t t = 0; t < c.recall_trials; ++t) {
      const std::uint64_t seed = c.seed + t;
      const Scene scene = make_random_box_scene(c.box, seed);
      const Pose pose = make_orbit_trajectory(c.box, {c.orbit_radius, 1}, seed).poses.front();
      const auto truth = brute_force_visible(scene, cam, pose, c.d_min, c.d_max);
      const VoxelMap vmap = build_voxel_map(scene.points, c.voxel_size, c.table_size_n);
      const auto start = Clock::now();
      const auto set = query_visible(vmap, tmpl, pose, c.recall_first_hit);
      times.push_back(std::chrono::duration<double, std::nano>(Clock::now() - start).count());

      RecallTrial trial;
      const auto f = compare_ids(ids_of(set), truth);
      trial.recall = f.recall;
      trial.precision = f.precision;
      for (const auto* p : set.points()) {
        ++trial.returned;
        const Vec3 pc = pose.to_camera(p->position);
        bool inside = pc.z() > 0.0;
        if (inside) {
          const double u = cam.fx * pc.x() / pc.z() + cam.cx;
          const double v = cam.fy * pc.y() / pc.z() + cam.cy;
          inside = u >= -margin && u < cam.width + margin && v >= -margin && v < cam.height + margin;
        }
        if (!inside) ++trial.outside_dilated;
      }
      recall.push_back(trial.recall);
      precision.push_back(trial.precision);
      probes.push_back(static_cast<double>(set.probes));
      trials.push_back(trial);
    }
    const auto t = summarize(times);
    BenchRecord r;
    std::ostringstream id;
    id << "recall-g" << step;
    r.experiment = id.str();
    r.map_kind = c.recall_first_hit ? "voxel" : "voxel-all";
    r.map_size = c.box.count;
    r.voxel_size = c.voxel_size;
    r.median_ns = t.median_ns;
    r.mean_ns = t.mean_ns;
    r.probes = mean_of(probes);
    r.recall = mean_of(recall);
    r.precision = mean_of(precision);
    out.records.push_back(r);
    out.trials.push_back(std::move(trials));
  }
  return out;
}

// ---- checks -------------------------------------------------------------------

namespace {

const BenchRecord* find_record(const std::vector<BenchRecord>& records, const std::string& kind,
                               std::size_t map_size) {
  for (const auto& r : records) {
    if (r.map_kind == kind && r.map_size == map_size) return &r;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> check(const ScalingResult& r, const BenchConfig& c) {
  std::vector<std::string> failures;
  if (r.records.empty()) return {"scaling: no records"};
  const std::size_t smallest = r.records.front().map_size;
  const std::size_t largest = r.records.back().map_size;
  const auto* v0 = find_record(r.records, "voxel", smallest);
  const auto* v1 = find_record(r.records, "voxel", largest);
  const auto* k0 = find_record(r.records, "keyframe", smallest);
  const auto* k1 = find_record(r.records, "keyframe", largest);
  if (!v0 || !v1 || !k0 || !k1) return {"scaling: missing records"};
  const double vratio = v1->median_ns / v0->median_ns;
  const double kratio = k1->median_ns / k0->median_ns;
  if (!(vratio <= c.max_voxel_time_ratio)) {
    failures.push_back("scaling: voxel time ratio " + num(vratio) + " > " + num(c.max_voxel_time_ratio));
  }
  if (!(kratio >= c.min_keyframe_time_ratio)) {
    failures.push_back("scaling: keyframe time ratio " + num(kratio) + " < " +
                       num(c.min_keyframe_time_ratio));
  }
  for (const auto& probes : r.voxel_probes) {
    if (probes != r.voxel_probes.front()) {
      failures.push_back("scaling: voxel probes differ between map sizes");
      break;
    }
  }
  return failures;
}

std::vector<std::string> check(const OcclusionResult& r, const BenchConfig&) {
  std::vector<std::string> failures;
  if (r.first_hit_far_on_occluded_rays != 0) {
    failures.push_back("occlusion: first-hit query returned " +
                       std::to_string(r.first_hit_far_on_occluded_rays) +
                       " far-wall points behind nearer voxels");
  }
  if (r.keyframe_far_occluded == 0) {
    failures.push_back("occlusion: keyframe baseline returned no occluded far-wall point");
  }
  return failures;
}

std::vector<std::string> check(const SweepResult& r, const BenchConfig&) {
  std::vector<std::string> failures;
  auto at = [&](double size) -> const BenchRecord* {
    for (const auto& rec : r.records) {
      if (rec.voxel_size && std::abs(*rec.voxel_size - size) < 1e-9) return &rec;
    }
    return nullptr;
  };
  const auto* small = at(0.5);
  const auto* mid = at(5.0);
  const auto* large = at(20.0);
  if (small && mid && !(small->median_ns > mid->median_ns)) {
    failures.push_back("voxel-sweep: 0.5 m query is not slower than 5 m");
  }
  if (large && mid && !(*large->precision < *mid->precision)) {
    failures.push_back("voxel-sweep: 20 m precision is not below 5 m precision");
  }
  return failures;
}

std::vector<std::string> check(const RecallResult& r, const BenchConfig& c) {
  std::vector<std::string> failures;
  for (std::size_t g = 0; g < r.trials.size(); ++g) {
    const auto& rec = r.records[g];
    if (!(*rec.recall >= c.min_recall)) {
      failures.push_back(rec.experiment + ": mean recall " + num(*rec.recall) + " < " + num(c.min_recall));
    }
    std::size_t outside = 0;
    for (const auto& t : r.trials[g]) outside += t.outside_dilated;
    if (outside != 0) {
      failures.push_back(rec.experiment + ": " + std::to_string(outside) +
                         " returned points outside the dilated image");
    }
  }
  return failures;
}

RunOutcome run_and_write(const BenchConfig& c, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  RunOutcome outcome;
  auto write_file = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(out_dir) / name);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(out_dir) / name).string());
    f << text;
  };
  switch (c.experiment) {
    case Experiment::Scaling: {
      auto r = run_scaling(c);
      outcome.failures = check(r, c);
      outcome.records = std::move(r.records);
      break;
    }
    case Experiment::Occlusion: {
      auto r = run_occlusion(c);
      outcome.failures = check(r, c);
      write_file("occlusion_voxel_points.csv", r.voxel_points_csv);
      write_file("occlusion_keyframe_points.csv", r.keyframe_points_csv);
      outcome.records = std::move(r.records);
      break;
    }
    case Experiment::VoxelSweep: {
      auto r = run_voxel_size_sweep(c);
      outcome.failures = check(r, c);
      outcome.records = std::move(r.records);
      break;
    }
    case Experiment::Recall: {
      auto r = run_recall(c);
      outcome.failures = check(r, c);
      outcome.records = std::move(r.records);
      break;
    }
  }
  std::ostringstream csv, gp;
  write_records_csv(csv, outcome.records);
  write_records_gnuplot(gp, outcome.records);
  write_file("results.csv", csv.str());
  write_file("results.gp", gp.str());
  return outcome;
}

}  // namespace voxmap::bench
