#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "voxmap/camera.hpp"
#include "voxmap/scene.hpp"

namespace voxmap::bench {

enum class Experiment { Scaling, Occlusion, VoxelSweep, Recall };

std::string to_string(Experiment e);
/// Accepts the CLI spellings: scaling, occlusion, voxel-sweep, recall.
Experiment parse_experiment(const std::string& name);

/// All knobs of the benchmark runner. Config files are `key = value` lines,
/// `#` starts a comment, lists are comma separated. Every key has a default;
/// see README.md for the full table.
struct BenchConfig {
  Experiment experiment = Experiment::Scaling;
  std::size_t repeats = 9;
  std::size_t inner_iterations = 20;
  std::size_t warmup = 3;
  std::uint64_t seed = 1;

  CameraModel camera;
  double grid_step = 32.0;
  double d_min = 0.5;
  double d_max = 30.0;
  double voxel_size = 2.0;
  std::size_t table_size_n = 100003;
  std::size_t max_points_per_kf = 100;

  // scaling
  std::vector<double> wall_lengths = {100, 200, 300, 400, 500, 600, 700, 800, 900};
  std::vector<std::size_t> wall_points = {1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000};
  double wall_height = 4.0;
  double wall_offset = 5.0;
  std::size_t query_poses = 10;
  /// x-extent covered by the query poses; 0 means the shortest wall length.
  double trajectory_span = 0.0;
  bool scaling_first_hit = true;

  // occlusion
  CorridorParams corridor;

  // voxel-size sweep and recall
  std::vector<double> voxel_sizes = {0.5, 5, 10, 15, 20};
  RandomBoxParams box;
  double orbit_radius = 32.0;
  std::size_t sweep_poses = 10;
  bool sweep_first_hit = false;
  std::size_t recall_trials = 100;
  std::vector<double> recall_grid_steps = {32, 16};
  bool recall_first_hit = false;

  // thresholds used by --check
  double max_voxel_time_ratio = 1.5;
  double min_keyframe_time_ratio = 5.0;
  double min_recall = 0.95;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Throws ValidationError naming the offending key or line.
BenchConfig parse_config(std::istream& in, BenchConfig base = {});
BenchConfig load_config(const std::string& path, BenchConfig base = {});

struct TimingStats {
  double median_ns = 0.0;
  double mean_ns = 0.0;
  std::vector<double> per_repeat_ns;
};

struct BenchRecord {
  std::string experiment;
  std::string map_kind;  // voxel | voxel-all | keyframe
  std::size_t map_size = 0;
  std::optional<double> voxel_size;
  double median_ns = 0.0;
  double mean_ns = 0.0;
  std::optional<double> probes;
  std::optional<double> keyframes_scanned;
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<std::size_t> occluded_returned;
};

inline constexpr const char* kRecordCsvHeader =
    "experiment,map_kind,map_size,voxel_size,median_ns,mean_ns,probes,keyframes_scanned,"
    "recall,precision,occluded_returned";

void write_records_csv(std::ostream& out, const std::vector<BenchRecord>& records);
/// Gnuplot data: one `index` block per map kind, whitespace separated.
void write_records_gnuplot(std::ostream& out, const std::vector<BenchRecord>& records);

/// Recall and precision of `returned` against `truth`; both sorted ascending.
/// Empty truth gives recall 1, empty returned gives precision 1.
struct Fidelity {
  double recall = 1.0;
  double precision = 1.0;
};
Fidelity compare_ids(const std::vector<PointId>& returned, const std::vector<PointId>& truth);

struct ScalingResult {
  std::vector<BenchRecord> records;
  /// Per wall size, probes of each query pose.
  std::vector<std::vector<std::size_t>> voxel_probes;
  std::size_t template_samples = 0;
};

struct OcclusionResult {
  std::vector<BenchRecord> records;
  std::size_t precondition_rays = 0;
  /// Far-wall points returned from voxels that every sampling ray reaches only
  /// after a nearer non-empty voxel.
  std::size_t first_hit_far_on_occluded_rays = 0;
  std::size_t all_samples_far_on_occluded_rays = 0;
  /// Far-wall points returned whose line of sight crosses the near wall.
  std::size_t first_hit_far_occluded = 0;
  std::size_t keyframe_far_occluded = 0;
  std::size_t keyframe_far_returned = 0;
  Pose turn_pose;
  std::string voxel_points_csv;
  std::string keyframe_points_csv;
};

struct SweepResult {
  std::vector<BenchRecord> records;
};

struct RecallTrial {
  double recall = 1.0;
  double precision = 1.0;
  std::size_t returned = 0;
  /// Returned points projecting outside the image dilated by
  /// voxel_size * max(fx, fy) / d_min pixels (or behind the camera).
  std::size_t outside_dilated = 0;
};

struct RecallResult {
  std::vector<BenchRecord> records;
  /// Trials for each grid step, in config order.
  std::vector<std::vector<RecallTrial>> trials;
};

ScalingResult run_scaling(const BenchConfig& config);
OcclusionResult run_occlusion(const BenchConfig& config);
SweepResult run_voxel_size_sweep(const BenchConfig& config);
RecallResult run_recall(const BenchConfig& config);

/// Empty when every threshold holds, otherwise one message per failure.
std::vector<std::string> check(const ScalingResult& r, const BenchConfig& config);
std::vector<std::string> check(const OcclusionResult& r, const BenchConfig& config);
std::vector<std::string> check(const SweepResult& r, const BenchConfig& config);
std::vector<std::string> check(const RecallResult& r, const BenchConfig& config);

struct RunOutcome {
  std::vector<BenchRecord> records;
  std::vector<std::string> failures;
};

/// Runs `config.experiment`, writes results.csv and results.gp (plus the
/// per-point CSVs for occlusion) into `out_dir`.
RunOutcome run_and_write(const BenchConfig& config, const std::string& out_dir);

}  // namespace voxmap::bench
