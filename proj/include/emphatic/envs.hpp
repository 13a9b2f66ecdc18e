#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "emphatic/continuous.hpp"
#include "emphatic/mdp.hpp"
#include "emphatic/policies.hpp"

namespace emphatic {

struct DiscreteEnv {
  std::string name;
  TabularMdp mdp;
  FeatureMap features;
  PolicyTable behaviour;
  /// States sharing a feature vector with another state.
  std::vector<int> aliased_states;
};

struct ContinuousEnv {
  std::string name;
  ContinuousActionMdp mdp;
  FeatureMap features;
  GaussianBehaviour behaviour;
  std::vector<int> aliased_states;
};

/// S0 -> {S1, S2} -> T with aliased S1/S2 and behaviour mu(A0) = 0.25.
DiscreteEnv make_three_state();

/// Reward for A1 at S10 in the eleven-state env.
inline constexpr double kElevenStateS10Reward = 0.8;

/// S0 branching into two 4-state chains that end in aliased S9 / S10.
DiscreteEnv make_eleven_state(double s10_reward = kElevenStateS10Reward);

/// Continuous-action analogue of the three-state env.
ContinuousEnv make_continuous();

// Closed forms for the continuous env.
double sigmoid_prime(double a);
double continuous_q_s0(double a, double v1, double v2);
double continuous_dq_s0(double a, double v1, double v2);
double continuous_q_s1(double a);
double continuous_q_s2(double a);
double continuous_dq_s1(double a);
double continuous_dq_s2(double a);

/// Names accepted by make_env-style lookups.
inline const std::vector<std::string>& env_ids() {
  static const std::vector<std::string> ids{"three-state", "eleven-state", "continuous"};
  return ids;
}
bool is_continuous_env(const std::string& id);
DiscreteEnv make_discrete_env(const std::string& id);

/// States whose feature rows coincide with another state's row, ascending.
std::vector<int> aliased_states(const FeatureMap& features);

/// Best objective over deterministic policies that respect the feature map
/// (aliased states share an action). Returns J and writes the policy table.
double aliased_optimum(const DiscreteEnv& env, PolicyTable* best = nullptr);

// ---------------------------------------------------------------------------
// MDP description files

nlohmann::json env_to_json(const DiscreteEnv& env);
/// Parses a description. With validate = true, probability and shape errors
/// throw ValidationError; otherwise the raw tensors are returned for reporting.
DiscreteEnv env_from_json(const nlohmann::json& doc, bool validate = true);
DiscreteEnv load_env(const std::filesystem::path& path, bool validate = true);
void save_env(const DiscreteEnv& env, const std::filesystem::path& path);

}  // namespace emphatic
