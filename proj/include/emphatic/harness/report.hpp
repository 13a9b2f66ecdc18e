#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "emphatic/harness/runner.hpp"

namespace emphatic::harness {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};

/// Sample mean and standard error (sd / sqrt(n)); se = 0 for a single value.
MeanSe mean_se(const std::vector<double>& values);

struct SweepCell {
  GridPoint point;
  int runs = 0;
  int failures = 0;
  MeanSe final_J;
  MeanSe final_metric;
};

struct BestChoice {
  double lambda_a = 0.0;
  int cell = -1;  // index into SweepReport::cells
};

struct SweepReport {
  std::vector<SweepCell> cells;  // ordered by grid index
  std::vector<BestChoice> best;  // ascending lambda_a
};

/// Mean +- standard error of the final objective per grid point, and the best
/// grid point per lambda_a. Cells containing failed runs are never selected.
/// Throws EmptyInput for an empty record set.
SweepReport sweep_report(const std::vector<RunRecord>& records);

std::string format_report(const SweepReport& report);
nlohmann::json report_json(const SweepReport& report);

/// Records of one grid point.
std::vector<RunRecord> select_cell(const std::vector<RunRecord>& records, int grid_index);

struct Curve {
  std::vector<long long> steps;
  std::vector<double> mean;
  std::vector<double> se;
};

/// Pointwise mean and standard error across records of J or the aliased
/// metric. Uses the steps common to every completed record.
Curve mean_curve(const std::vector<RunRecord>& records, bool metric);

}  // namespace emphatic::harness
