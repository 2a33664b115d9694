#pragma once

// Seeded sweeps over one configuration axis with repeated runs, written out
// as one CSV per (sweep value, run) plus aggregates.

#include "subgd/config.hpp"
#include "subgd/csv.hpp"
#include "subgd/trainer.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace subgd {

struct RunResult {
  double sweep_value = 0;  // NaN for configurations without a sweep
  int run = 0;
  std::filesystem::path csv;
  TrainTrace trace;
  double tau_ub = 0;
  double eta = 0, lambda = 0, gamma = 0;  // as resolved from the data
  std::vector<RobustnessRow> robustness;  // empty when the sigma grid is
};

struct RunSummary {
  std::string config_hash;
  std::filesystem::path output_dir;
  std::vector<RunResult> runs;           // ordered by (sweep index, run)
  std::vector<std::filesystem::path> aggregates;  // one per sweep value
  bool all_diverged = false;
};

/// Sweep points of a configuration: the axis values, or a single point.
std::vector<ExperimentConfig> sweep_points(const ExperimentConfig& cfg);

/// Trains one (point, run) pair in memory; `csv` stays empty. `point` must
/// carry no sweep.
RunResult run_single(const ExperimentConfig& point, int run);

/// Runs every (sweep value, run) pair on `threads` workers and writes
///   <out>/<axis>=<v>/run_<r>.csv, aggregate.csv, [robustness_<r>.csv]
///   <out>/summary.csv, curves.csv, [robustness.csv], meta.txt, timing.log
RunSummary run(const ExperimentConfig& cfg, int threads = 1, std::ostream* progress = nullptr);

/// Builds the configured instance (first run) and prints the derived step
/// size, weight decay, horizon and phase-one bound.
void print_theory(const ExperimentConfig& cfg, std::ostream& os);

}  // namespace subgd
