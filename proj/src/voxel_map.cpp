#include "voxmap/voxel_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace voxmap {

namespace {

// Scaled coordinates beyond this are not addressable as grid cells.
constexpr double kMaxGridCoordinate = 4.0e18;

std::int64_t cell_index(double coordinate, double voxel_size) {
  const double scaled = std::floor(coordinate / voxel_size);
  if (!(scaled > -kMaxGridCoordinate)) return static_cast<std::int64_t>(-kMaxGridCoordinate);
  if (!(scaled < kMaxGridCoordinate)) return static_cast<std::int64_t>(kMaxGridCoordinate);
  return static_cast<std::int64_t>(scaled);
}

bool addressable(const Vec3& position, double voxel_size) {
  if (!is_finite(position)) return false;
  return (position.array().abs() / voxel_size < kMaxGridCoordinate).all();
}

}  // namespace

VoxelKey key_of(const Vec3& position, double voxel_size) {
  return {cell_index(position.x(), voxel_size), cell_index(position.y(), voxel_size),
          cell_index(position.z(), voxel_size)};
}

void VoxelMapConfig::validate() const {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw ValidationError("voxel_size must be finite and > 0, got " + std::to_string(voxel_size));
  }
  if (table_size_n < 1) throw ValidationError("table_size_n must be >= 1");
  if (bucket_capacity_hint < 1) throw ValidationError("bucket_capacity_hint must be >= 1");
  if (!(position_epsilon >= 0.0)) throw ValidationError("position_epsilon must be >= 0");
}

std::size_t hash_key(const VoxelKey& key, const VoxelMapConfig& config) {
  const auto ux = static_cast<std::uint64_t>(key.ix);
  const auto uy = static_cast<std::uint64_t>(key.iy);
  const auto uz = static_cast<std::uint64_t>(key.iz);
  const std::uint64_t h = (ux * config.p1) ^ (uy * config.p2) ^ (uz * config.p3);
  return static_cast<std::size_t>(h % static_cast<std::uint64_t>(config.table_size_n));
}

VoxelMap::VoxelMap(VoxelMapConfig config) : config_(config) {
  config_.validate();
  buckets_.resize(config_.table_size_n);
}

bool VoxelMap::same_position(const Vec3& a, const Vec3& b) const {
  return ((a - b).array().abs() <= config_.position_epsilon).all();
}

InsertOutcome VoxelMap::insert_point(MapPoint point) {
  if (!is_finite(point.position)) {
    throw ValidationError("insert_point: non-finite position for point " + std::to_string(point.id));
  }
  if (!addressable(point.position, config_.voxel_size)) {
    throw ValidationError("insert_point: position outside the addressable grid for point " +
                          std::to_string(point.id));
  }
  const VoxelKey k = key(point.position);
  auto& bucket = buckets_[hash_key(k, config_)];
  for (auto& voxel : bucket) {
    if (voxel.key != k) continue;
    for (auto& existing : voxel.points) {
      if (same_position(existing.position, point.position)) {
        existing.description = std::move(point.description);
        existing.id = point.id;
        return InsertOutcome::UpdatedDescription;
      }
    }
    voxel.points.push_back(std::move(point));
    ++point_count_;
    return InsertOutcome::Appended;
  }
  if (bucket.capacity() == 0) bucket.reserve(config_.bucket_capacity_hint);
  bucket.push_back(Voxel{k, {}});
  bucket.back().points.push_back(std::move(point));
  ++point_count_;
  ++voxel_count_;
  return InsertOutcome::CreatedVoxel;
}

bool VoxelMap::delete_point(const Vec3& position, PointId id) {
  if (!addressable(position, config_.voxel_size)) return false;
  const VoxelKey k = key(position);
  auto& bucket = buckets_[hash_key(k, config_)];
  auto voxel_it = std::find_if(bucket.begin(), bucket.end(),
                               [&](const Voxel& v) { return v.key == k; });
  if (voxel_it == bucket.end()) return false;
  auto& points = voxel_it->points;
  auto point_it =
      std::find_if(points.begin(), points.end(), [&](const MapPoint& p) { return p.id == id; });
  if (point_it == points.end()) return false;
  points.erase(point_it);
  --point_count_;
  if (points.empty()) {
    bucket.erase(voxel_it);
    --voxel_count_;
  }
  return true;
}

const Voxel* VoxelMap::query_voxel(const Vec3& position) const {
  if (!addressable(position, config_.voxel_size)) return nullptr;
  return query_voxel(key(position));
}

const Voxel* VoxelMap::query_voxel(const VoxelKey& k) const {
  for (const auto& voxel : buckets_[hash_key(k, config_)]) {
    if (voxel.key == k) return &voxel;
  }
  return nullptr;
}

MapStats VoxelMap::stats() const {
  MapStats s;
  s.point_count = point_count_;
  s.voxel_count = voxel_count_;
  std::size_t occupied = 0;
  for (const auto& bucket : buckets_) {
    if (bucket.empty()) continue;
    ++occupied;
    s.max_bucket_length = std::max(s.max_bucket_length, bucket.size());
  }
  if (occupied > 0) s.mean_bucket_length = static_cast<double>(voxel_count_) / occupied;
  return s;
}

void VoxelMap::for_each_voxel(const std::function<void(const Voxel&)>& fn) const {
  for (const auto& bucket : buckets_) {
    for (const auto& voxel : bucket) fn(voxel);
  }
}

}  // namespace voxmap
