#include "voxmap/keyframe_map.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace voxmap {

KeyframeMap KeyframeMap::build_from_scene(const std::vector<MapPoint>& points,
                                          const std::vector<Pose>& poses, const CameraModel& cam,
                                          std::size_t max_points_per_kf) {
  if (poses.empty()) throw ValidationError("keyframe map: pose list is empty");
  if (max_points_per_kf == 0) throw ValidationError("keyframe map: max_points_per_kf must be > 0");
  if (points.size() > poses.size() * max_points_per_kf) {
    throw ValidationError("keyframe map: " + std::to_string(points.size()) + " points exceed " +
                          std::to_string(poses.size()) + " keyframes x " +
                          std::to_string(max_points_per_kf) + " capacity");
  }
  cam.validate();

  KeyframeMap map;
  map.cam_ = cam;
  map.max_points_per_kf_ = max_points_per_kf;
  map.keyframes_.reserve(poses.size());
  for (const auto& pose : poses) map.keyframes_.push_back({pose, {}});

  std::vector<std::size_t> order(poses.size());
  std::vector<double> dist2(poses.size());
  for (const auto& p : points) {
    for (std::size_t k = 0; k < poses.size(); ++k) {
      dist2[k] = (poses[k].translation() - p.position).squaredNorm();
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist2[a] < dist2[b]; });
    for (const auto k : order) {
      if (map.keyframes_[k].points.size() < max_points_per_kf) {
        map.keyframes_[k].points.push_back(p);
        break;
      }
    }
  }
  return map;
}

std::size_t KeyframeMap::point_count() const {
  std::size_t n = 0;
  for (const auto& kf : keyframes_) n += kf.points.size();
  return n;
}

KeyframeQueryResult query_visible_kf(const KeyframeMap& map, const Pose& query_pose, double d_min,
                                     double d_max) {
  KeyframeQueryResult out;
  const auto& cam = map.camera();
  const auto& kfs = map.keyframes();
  for (std::size_t k = 0; k < kfs.size(); ++k) {
    ++out.keyframes_scanned;
    bool overlapping = false;
    for (const auto& p : kfs[k].points) {
      if (!in_frustum(cam, query_pose, p.position, d_min, d_max)) continue;
      overlapping = true;
      out.points.push_back(&p);
    }
    if (overlapping) out.overlapping.push_back(k);
  }
  return out;
}

}  // namespace voxmap
