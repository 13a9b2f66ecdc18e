#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "emphatic/montecarlo.hpp"

namespace emphatic::harness {

struct CheckResult {
  std::string name;
  bool pass = false;
  bool skipped = false;
  double error = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::vector<std::string> checks;  // empty runs every check
  int random_thetas = 20;
  long long mc_episodes = 100000;
  long long weighting_steps = 1000000;
  std::uint64_t seed = 1;
  Execution exec = Execution::Parallel;
};

/// validation, stationary, fixed-point, bellman-gradient, gradient-fd,
/// endpoint, unbiasedness, weighting, sum-grad-zero
const std::vector<std::string>& check_names();

/// Runs the selected checks on a built-in env id or an MDP description file.
/// Failures are reported in the results, never thrown.
std::vector<CheckResult> verify_env(const std::string& env, const VerifyOptions& options = {});

bool all_passed(const std::vector<CheckResult>& results);
std::string format_verify(const std::vector<CheckResult>& results);
nlohmann::json verify_json(const std::vector<CheckResult>& results);

}  // namespace emphatic::harness
