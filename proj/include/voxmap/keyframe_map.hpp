#pragma once

#include <cstddef>
#include <vector>

#include "voxmap/camera.hpp"

namespace voxmap {

struct Keyframe {
  Pose pose;
  std::vector<MapPoint> points;
};

/// Naive keyframe map: every point is owned by exactly one keyframe and
/// visibility is answered by scanning all of them.
class KeyframeMap {
 public:
  static constexpr std::size_t kDefaultMaxPointsPerKeyframe = 100;

  /// Assigns each point to the keyframe with the nearest camera center that
  /// still has room (ties and overflow go to the next nearest). Throws
  /// ValidationError for an empty pose list, a zero cap, or more points than
  /// total capacity.
  static KeyframeMap build_from_scene(const std::vector<MapPoint>& points,
                                      const std::vector<Pose>& poses, const CameraModel& cam,
                                      std::size_t max_points_per_kf = kDefaultMaxPointsPerKeyframe);

  const std::vector<Keyframe>& keyframes() const { return keyframes_; }
  const CameraModel& camera() const { return cam_; }
  std::size_t max_points_per_kf() const { return max_points_per_kf_; }
  std::size_t point_count() const;

 private:
  std::vector<Keyframe> keyframes_;
  CameraModel cam_;
  std::size_t max_points_per_kf_ = kDefaultMaxPointsPerKeyframe;
};

struct KeyframeQueryResult {
  std::vector<const MapPoint*> points;
  std::vector<std::size_t> overlapping;  // keyframe indices
  std::size_t keyframes_scanned = 0;
};

/// Tests every point of every keyframe against the frustum at `query_pose`
/// limited to [d_min, d_max]. A keyframe with at least one visible point is
/// overlapping; all its visible points are returned. No occlusion reasoning.
KeyframeQueryResult query_visible_kf(const KeyframeMap& map, const Pose& query_pose, double d_min,
                                     double d_max);

}  // namespace voxmap
