#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace emphatic::harness {

enum class ActorKind { Ace, TrueAce, Dpg, TrueDpge };
enum class CriticKind { Oracle, Gtd };
enum class InitKind { Zero, NearOptimal };
enum class UpdateMode { Sampled, Expected };

std::string to_string(ActorKind kind);
std::string to_string(CriticKind kind);
std::string to_string(InitKind kind);
std::string to_string(UpdateMode mode);

// Declarative description of a sweep. Every list is a grid axis; the sweep is
// their cartesian product, each point repeated `runs` times.
struct ExperimentConfig {
  std::string env = "three-state";  // env id or path to an MDP description
  ActorKind actor = ActorKind::Ace;
  CriticKind critic = CriticKind::Oracle;
  bool all_actions = false;  // ACE all-actions branch instead of the td-error branch
  std::vector<double> lambda_a{0.9};
  std::vector<double> actor_stepsizes{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  std::vector<double> critic_alpha_v{0.01};
  std::vector<double> critic_alpha_w{1e-4};
  std::vector<double> critic_lambda{0.0};
  long long steps = -1;  // -1 selects the env default
  long long log_interval = 100;
  int runs = 30;
  std::uint64_t base_seed = 0;
  InitKind init = InitKind::Zero;
  UpdateMode mode = UpdateMode::Sampled;
};

/// Default update budget for an env id.
long long default_steps(const std::string& env);
/// Budget after resolving the -1 default.
long long resolved_steps(const ExperimentConfig& config);

/// Throws ConfigInvalid on empty grids, out-of-range values and unsupported
/// actor/critic/env combinations.
void validate_config(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
/// Strict parse: unknown keys and malformed values throw ConfigInvalid.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical serialisation (sorted keys, resolved defaults).
std::string canonical_dump(const ExperimentConfig& config);
/// 64-bit FNV-1a of the canonical serialisation, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// One cell of the sweep grid.
struct GridPoint {
  int index = 0;
  double lambda_a = 0.0;
  double alpha = 0.0;
  double alpha_v = 0.0;
  double alpha_w = 0.0;
  double lambda_c = 0.0;
};

/// Cartesian product in a fixed order. Critic axes collapse to their first
/// value unless the critic is GTD.
std::vector<GridPoint> expand_grid(const ExperimentConfig& config);

}  // namespace emphatic::harness
