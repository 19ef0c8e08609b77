#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "voxmap/camera.hpp"
#include "voxmap/voxel_map.hpp"

namespace voxmap {

struct PixelSample {
  double u = 0.0;
  double v = 0.0;
};

/// Camera-frame discretization of the viewing frustum.
///
/// Pixels are taken on a regular grid anchored at (step/2, step/2). Every ray
/// carries the same number of samples, placed at evenly spaced z-depths from
/// d_min to d_max. The count is the smallest one that keeps the Euclidean gap
/// between consecutive samples on the most oblique ray at or below voxel_size,
/// so a ray cannot step over a whole cell along its direction.
///
/// Immutable after construction; one template serves every pose.
class RayTemplate {
 public:
  std::size_t ray_count() const { return pixels_.size(); }
  std::size_t samples_per_ray() const { return samples_per_ray_; }
  std::size_t total_samples() const { return samples_.size(); }

  double d_min() const { return d_min_; }
  double d_max() const { return d_max_; }
  double voxel_size() const { return voxel_size_; }
  double grid_step() const { return grid_step_; }
  const CameraModel& camera() const { return camera_; }

  std::span<const PixelSample> pixels() const { return pixels_; }
  /// Samples of one ray, ordered by increasing depth.
  std::span<const Vec3> ray(std::size_t i) const {
    return std::span<const Vec3>(samples_).subspan(i * samples_per_ray_, samples_per_ray_);
  }
  std::span<const Vec3> samples() const { return samples_; }

 private:
  friend RayTemplate build_ray_template(const CameraModel&, double, double, double, double);

  CameraModel camera_;
  double grid_step_ = 0.0;
  double d_min_ = 0.0;
  double d_max_ = 0.0;
  double voxel_size_ = 0.0;
  std::size_t samples_per_ray_ = 0;
  std::vector<PixelSample> pixels_;
  std::vector<Vec3> samples_;  // ray-major
};

/// Throws ValidationError on an empty depth range, grid_step < 1,
/// voxel_size <= 0 or a grid that yields no ray.
RayTemplate build_ray_template(const CameraModel& cam, double grid_step, double d_min,
                               double d_max, double voxel_size);

struct VisibleVoxel {
  const Voxel* voxel = nullptr;
  /// Lowest-index ray that returned this voxel and the z-depth of its sample.
  std::uint32_t ray_id = 0;
  double sample_depth = 0.0;
};

/// Result of a raycast query. Voxel pointers are valid until the map mutates.
struct VisibleSet {
  std::vector<VisibleVoxel> voxels;
  /// Index into `voxels` of the voxel each ray returned first, or -1.
  std::vector<std::int32_t> first_hit;
  /// Sample positions examined (one per sample, cached lookups included).
  std::size_t probes = 0;

  std::vector<VoxelKey> voxels_hit() const;
  std::size_t point_count() const;
  std::vector<const MapPoint*> points() const;
};

/// Probes template samples ray by ray, nearest first, at `pose`.
///
/// With first_hit_only each ray stops at its first non-empty voxel, whose
/// whole point list is returned; points of one voxel never occlude each
/// other. Otherwise every sample is probed. A voxel reached by several rays is
/// returned once. Throws ConfigError if the template was built for another
/// voxel size than the map's.
VisibleSet query_visible(const VoxelMap& map, const RayTemplate& tmpl, const Pose& pose,
                         bool first_hit_only = true);

/// `ray_id,voxel_ix,voxel_iy,voxel_iz,point_id,depth` rows, depth being the
/// point's z-depth at `pose`.
void write_visible_csv(std::ostream& out, const VisibleSet& set, const Pose& pose,
                       bool header = true);

}  // namespace voxmap
