#pragma once

#include "uan/experiment/config.hpp"
#include "uan/solvers.hpp"

#include <filesystem>
#include <ostream>

namespace uan::experiment {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitMaxIters = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitVerifyFailed = 4;

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool quiet = false;
  /// Worker threads for sweep.
  unsigned jobs = 1;
};

int exit_code(RunStatus status);

/// The configured x0, or a seeded uniform sample from the configured ball.
Vector resolve_start(const ExperimentConfig& config);

StopRule make_stop_rule(const ExperimentConfig& config, const Problem& problem);
SelectionPolicy make_policy(const ExperimentConfig& config);

IterationTrace run_algorithm(const ExperimentConfig& config, const Problem& problem, const Vector& x0);

/// Runs the experiment and writes the trace file. Returns the exit code.
int run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

/// Oracle suite: inequality sampling for every projector and for the driving
/// operator, fixed-point classification at the configured points, a radius
/// estimate and grid prox comparisons. The report has a top-level "passed".
json verify_report(const ExperimentConfig& config);
int verify_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

/// Runs every sweep start and groups converged limits into basins.
json sweep_summary(const ExperimentConfig& config, const RunOptions& options);
int sweep_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

}  // namespace uan::experiment
