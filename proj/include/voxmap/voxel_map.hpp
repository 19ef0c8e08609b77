#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "voxmap/types.hpp"

namespace voxmap {

/// Integer grid coordinate of a voxel. Cell (ix, iy, iz) covers the half-open
/// cube [ix*s, (ix+1)*s) x [iy*s, (iy+1)*s) x [iz*s, (iz+1)*s) for voxel size s.
struct VoxelKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::int64_t iz = 0;

  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

VoxelKey key_of(const Vec3& position, double voxel_size);

struct Voxel {
  VoxelKey key;
  std::vector<MapPoint> points;
};

/// Parameters of the hash table.
///
/// The bucket index of a key is
///   ((ix * p1) XOR (iy * p2) XOR (iz * p3)) mod table_size_n
/// with coordinates reinterpreted as 64-bit two's-complement unsigned values
/// and wrapping multiplication. Default primes are the classical spatial
/// hashing constants 73856093, 19349663, 83492791.
struct VoxelMapConfig {
  double voxel_size = 2.0;
  std::size_t table_size_n = 100003;
  std::size_t bucket_capacity_hint = 1;
  /// Per-axis absolute tolerance under which two positions are "the same point".
  double position_epsilon = 1e-6;
  std::uint64_t p1 = 73856093;
  std::uint64_t p2 = 19349663;
  std::uint64_t p3 = 83492791;

  void validate() const;
};

std::size_t hash_key(const VoxelKey& key, const VoxelMapConfig& config);

enum class InsertOutcome { CreatedVoxel, Appended, UpdatedDescription };

struct MapStats {
  std::size_t point_count = 0;
  std::size_t voxel_count = 0;
  std::size_t max_bucket_length = 0;
  /// Averaged over occupied buckets only; 0 for an empty map.
  double mean_bucket_length = 0.0;

  friend bool operator==(const MapStats&, const MapStats&) = default;
};

/// Bucketed hash table of voxels.
///
/// Each bucket is a contiguous list of voxels scanned linearly. Voxels are
/// deallocated when their last point is removed, so every reachable voxel is
/// non-empty.
///
/// Not internally synchronized: mutations need exclusive access, const
/// members may run concurrently with each other. Pointers returned by
/// query_voxel() are invalidated by any mutation.
class VoxelMap {
 public:
  explicit VoxelMap(VoxelMapConfig config = {});

  const VoxelMapConfig& config() const { return config_; }
  double voxel_size() const { return config_.voxel_size; }

  VoxelKey key(const Vec3& position) const { return key_of(position, config_.voxel_size); }

  /// Throws ValidationError for a non-finite position (map unchanged).
  InsertOutcome insert_point(MapPoint point);

  /// Removes the point with `id` from the voxel covering `position`.
  bool delete_point(const Vec3& position, PointId id);

  const Voxel* query_voxel(const Vec3& position) const;
  const Voxel* query_voxel(const VoxelKey& key) const;

  MapStats stats() const;

  std::size_t point_count() const { return point_count_; }
  std::size_t voxel_count() const { return voxel_count_; }

  const std::vector<std::vector<Voxel>>& buckets() const { return buckets_; }

  void for_each_voxel(const std::function<void(const Voxel&)>& fn) const;

 private:
  bool same_position(const Vec3& a, const Vec3& b) const;

  VoxelMapConfig config_;
  std::vector<std::vector<Voxel>> buckets_;
  std::size_t point_count_ = 0;
  std::size_t voxel_count_ = 0;
};

}  // namespace voxmap
