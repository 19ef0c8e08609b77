// bench: runs the voxel-map benchmarks and writes results.csv / results.gp.
//
//   bench scaling|occlusion|voxel-sweep|recall --out <dir> [--config <path>] [--seed N] [--check]
//
// Exit codes: 0 success, 2 invalid configuration, 3 threshold failure with --check.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "voxmap/bench.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCheckFailed = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voxel hashing map query benchmarks"};
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool run_check = false;
  app.add_option("experiment", experiment, "scaling | occlusion | voxel-sweep | recall")
      ->required()
      ->check(CLI::IsMember({"scaling", "occlusion", "voxel-sweep", "recall"}));
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_flag("--check", run_check, "exit 3 if an acceptance threshold fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  voxmap::bench::BenchConfig config;
  try {
    if (!config_path.empty()) config = voxmap::bench::load_config(config_path);
    config.experiment = voxmap::bench::parse_experiment(experiment);
    if (seed) config.seed = *seed;
    config.validate();
  } catch (const voxmap::ValidationError& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return kExitValidation;
  }

  voxmap::bench::RunOutcome outcome;
  try {
    outcome = voxmap::bench::run_and_write(config, out_dir);
  } catch (const voxmap::ValidationError& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return EXIT_FAILURE;
  }

  voxmap::bench::write_records_csv(std::cout, outcome.records);
  if (run_check && !outcome.failures.empty()) {
    for (const auto& f : outcome.failures) std::cerr << "FAIL " << f << '\n';
    return kExitCheckFailed;
  }
  return EXIT_SUCCESS;
}
