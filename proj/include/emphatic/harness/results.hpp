#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "emphatic/harness/config.hpp"
#include "emphatic/harness/runner.hpp"

namespace emphatic::harness {

// On-disk layout, one directory per config hash:
//   <root>/<hash>/config.json
//   <root>/<hash>/runs/NNN.csv     step,J,aliased_metric
//   <root>/<hash>/summary.json     per-run seeds, final values, theta and failures
struct ResultSet {
  std::filesystem::path dir;
  std::string hash;
  ExperimentConfig config;
  std::vector<RunRecord> records;
};

std::string run_csv(const RunRecord& record);
nlohmann::json summary_json(const ExperimentConfig& config, const std::vector<RunRecord>& records);

/// Writes the layout above and returns the hash directory.
std::filesystem::path write_results(const ExperimentConfig& config,
                                    const std::vector<RunRecord>& records,
                                    const std::filesystem::path& root);

ResultSet read_results(const std::filesystem::path& dir);

}  // namespace emphatic::harness
