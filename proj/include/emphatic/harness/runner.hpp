#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "emphatic/harness/config.hpp"

namespace emphatic::harness {

struct LogRow {
  long long step = 0;
  double J = 0.0;
  /// P(A0) at the aliased states (discrete) or their mean action (continuous).
  double aliased_metric = 0.0;
  std::string theta_hash;
};

struct RunRecord {
  std::string config_hash;
  GridPoint point;
  int run_index = 0;     // within the grid point
  int global_index = 0;  // point.index * runs + run_index
  std::uint64_t seed = 0;
  std::vector<LogRow> series;
  Eigen::VectorXd theta;
  std::string failure;  // empty for a completed run
  long long failed_step = -1;

  bool failed() const { return !failure.empty(); }
  double final_J() const { return series.empty() ? 0.0 : series.back().J; }
  double initial_J() const { return series.empty() ? 0.0 : series.front().J; }
  double final_metric() const { return series.empty() ? 0.0 : series.back().aliased_metric; }
};

/// FNV-1a over the raw bytes of theta, 16 hex digits.
std::string theta_hash(const Eigen::VectorXd& theta);

/// Initial actor parameters for a discrete env.
Eigen::VectorXd initial_softmax_parameters(int n_actions, int n_features, InitKind init);

/// One run; numerical errors become failure markers.
RunRecord execute_run(const ExperimentConfig& config, const GridPoint& point, int run_index);

/// Every run of the sweep, ordered by global index.
std::vector<RunRecord> run_serial(const ExperimentConfig& config);
/// Same records as run_serial, computed on an OpenMP worker pool.
std::vector<RunRecord> run_parallel(const ExperimentConfig& config, int threads = 0);

}  // namespace emphatic::harness
