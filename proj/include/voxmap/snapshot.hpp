#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxmap/voxel_map.hpp"

namespace voxmap {

// Text snapshot, one point per line:
//
//   voxelmap-v1 voxel_size=<f> n=<int>
//   <id> <x> <y> <z> <hex description>
//
// Coordinates are written with 17 significant digits so a load reproduces the
// saved positions exactly. An empty description is written as "-".

std::string hex_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> hex_decode(std::string_view hex);

void write_points(std::ostream& out, double voxel_size, std::size_t table_size_n,
                  const std::vector<MapPoint>& points);

struct PointFile {
  double voxel_size = 0.0;
  std::size_t table_size_n = 0;
  std::vector<MapPoint> points;
};

/// Throws ValidationError on a malformed header or line.
PointFile read_points(std::istream& in);

void save_snapshot(std::ostream& out, const VoxelMap& map);

/// Non-header config fields (primes, epsilon, capacity hint) come from `base`.
VoxelMap load_snapshot(std::istream& in, const VoxelMapConfig& base = {});

void save_snapshot_file(const std::string& path, const VoxelMap& map);
VoxelMap load_snapshot_file(const std::string& path, const VoxelMapConfig& base = {});

}  // namespace voxmap
