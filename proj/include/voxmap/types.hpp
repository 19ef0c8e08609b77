#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace voxmap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using PointId = std::uint64_t;

/// Bad input to an operation (non-finite coordinates, out-of-range parameters).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two components were built with incompatible settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A 3D landmark with its payload. The map never interprets `description`.
struct MapPoint {
  PointId id = 0;
  Vec3 position = Vec3::Zero();
  std::vector<std::uint8_t> description;
};

inline bool is_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace voxmap
