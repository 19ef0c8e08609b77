#include "voxmap/frustum_query.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <string>

namespace voxmap {

namespace {

// Per-thread memo of keys already probed during one query; stamping avoids
// clearing the table between queries.
class ProbeCache {
 public:
  struct Entry {
    VoxelKey key;
    std::uint32_t stamp = 0;
    std::int32_t slot = -1;  // index into VisibleSet::voxels, -1 = empty voxel
    const Voxel* voxel = nullptr;
  };

  void begin(std::size_t expected) {
    const std::size_t want = std::bit_ceil(std::max<std::size_t>(64, expected * 2));
    if (want > table_.size()) {
      table_.assign(want, Entry{});
      stamp_ = 0;
    }
    mask_ = table_.size() - 1;
    if (++stamp_ == 0) {
      std::fill(table_.begin(), table_.end(), Entry{});
      stamp_ = 1;
    }
  }

  // Returns the entry for `key`, inserting a blank one when absent.
  Entry& find(const VoxelKey& key, bool& inserted) {
    std::uint64_t h = static_cast<std::uint64_t>(key.ix) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(key.iy) * 0xC2B2AE3D27D4EB4FULL;
    h ^= static_cast<std::uint64_t>(key.iz) * 0x165667B19E3779F9ULL;
    h ^= h >> 29;
    for (std::size_t i = h & mask_;; i = (i + 1) & mask_) {
      Entry& e = table_[i];
      if (e.stamp != stamp_) {
        e.key = key;
        e.stamp = stamp_;
        e.slot = -1;
        e.voxel = nullptr;
        inserted = true;
        return e;
      }
      if (e.key == key) {
        inserted = false;
        return e;
      }
    }
  }

 private:
  std::vector<Entry> table_;
  std::size_t mask_ = 0;
  std::uint32_t stamp_ = 0;
};

}  // namespace

RayTemplate build_ray_template(const CameraModel& cam, double grid_step, double d_min,
                               double d_max, double voxel_size) {
  cam.validate();
  if (!(d_min > 0.0) || !(d_min < d_max) || !std::isfinite(d_max)) {
    throw ValidationError("ray template: need 0 < d_min < d_max, got d_min=" +
                          std::to_string(d_min) + " d_max=" + std::to_string(d_max));
  }
  if (!(grid_step >= 1.0)) throw ValidationError("ray template: grid_step must be >= 1");
  if (!(voxel_size > 0.0)) throw ValidationError("ray template: voxel_size must be > 0");

  RayTemplate t;
  t.camera_ = cam;
  t.grid_step_ = grid_step;
  t.d_min_ = d_min;
  t.d_max_ = d_max;
  t.voxel_size_ = voxel_size;

  for (double v = grid_step / 2.0; v < cam.height; v += grid_step) {
    for (double u = grid_step / 2.0; u < cam.width; u += grid_step) {
      t.pixels_.push_back({u, v});
    }
  }
  if (t.pixels_.empty()) throw ValidationError("ray template: grid step leaves no sampled pixel");

  // Euclidean length per unit z-depth is |(x/z, y/z, 1)|; the most oblique ray
  // needs the most samples.
  double max_stretch = 1.0;
  for (const auto& px : t.pixels_) {
    max_stretch = std::max(max_stretch, cam.backproject(px.u, px.v, 1.0).norm());
  }
  const double span = d_max - d_min;
  auto count = static_cast<std::size_t>(std::ceil(span * max_stretch / voxel_size)) + 1;
  // Guard against rounding pushing the gap a hair above voxel_size.
  while (span / static_cast<double>(count - 1) * max_stretch > voxel_size) ++count;
  t.samples_per_ray_ = count;

  t.samples_.reserve(t.pixels_.size() * count);
  for (const auto& px : t.pixels_) {
    const Vec3 unit_depth = cam.backproject(px.u, px.v, 1.0);
    for (std::size_t j = 0; j < count; ++j) {
      const double depth =
          j + 1 == count ? d_max : d_min + span * static_cast<double>(j) / (count - 1);
      t.samples_.push_back(unit_depth * depth);
    }
  }
  return t;
}

std::vector<VoxelKey> VisibleSet::voxels_hit() const {
  std::vector<VoxelKey> keys;
  keys.reserve(voxels.size());
  for (const auto& v : voxels) keys.push_back(v.voxel->key);
  return keys;
}

std::size_t VisibleSet::point_count() const {
  std::size_t n = 0;
  for (const auto& v : voxels) n += v.voxel->points.size();
  return n;
}

std::vector<const MapPoint*> VisibleSet::points() const {
  std::vector<const MapPoint*> out;
  out.reserve(point_count());
  for (const auto& v : voxels) {
    for (const auto& p : v.voxel->points) out.push_back(&p);
  }
  return out;
}

VisibleSet query_visible(const VoxelMap& map, const RayTemplate& tmpl, const Pose& pose,
                         bool first_hit_only) {
  const double vs = map.voxel_size();
  if (std::abs(tmpl.voxel_size() - vs) > 1e-12 * std::max(1.0, vs)) {
    throw ConfigError("query_visible: template built for voxel size " +
                      std::to_string(tmpl.voxel_size()) + " but map uses " + std::to_string(vs));
  }
  thread_local ProbeCache cache;
  cache.begin(tmpl.total_samples());

  VisibleSet out;
  out.first_hit.assign(tmpl.ray_count(), -1);
  const Mat3& r = pose.rotation();
  const Vec3& t = pose.translation();

  for (std::size_t ray = 0; ray < tmpl.ray_count(); ++ray) {
    const auto samples = tmpl.ray(ray);
    for (const Vec3& sc : samples) {
      ++out.probes;
      const VoxelKey key = key_of(r * sc + t, vs);
      bool inserted = false;
      auto& entry = cache.find(key, inserted);
      if (inserted) {
        entry.voxel = map.query_voxel(key);
        if (entry.voxel != nullptr) {
          entry.slot = static_cast<std::int32_t>(out.voxels.size());
          out.voxels.push_back({entry.voxel, static_cast<std::uint32_t>(ray), sc.z()});
        }
      }
      if (entry.voxel == nullptr) continue;
      if (out.first_hit[ray] < 0) out.first_hit[ray] = entry.slot;
      if (first_hit_only) break;
    }
  }
  return out;
}

void write_visible_csv(std::ostream& out, const VisibleSet& set, const Pose& pose, bool header) {
  if (header) out << "ray_id,voxel_ix,voxel_iy,voxel_iz,point_id,depth\n";
  for (const auto& hit : set.voxels) {
    const auto& key = hit.voxel->key;
    for (const auto& p : hit.voxel->points) {
      out << hit.ray_id << ',' << key.ix << ',' << key.iy << ',' << key.iz << ',' << p.id << ','
          << pose.to_camera(p.position).z() << '\n';
    }
  }
}

}  // namespace voxmap
