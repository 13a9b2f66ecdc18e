#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "emphatic/actors.hpp"
#include "emphatic/envs.hpp"

namespace emphatic {

// Monte Carlo estimators over independent episodes. Episodes are split into
// fixed-size chunks, each with its own derived seed, and chunk results are
// combined in chunk order, so serial and parallel execution agree bit for bit.

enum class Execution { Serial, Parallel };

struct McGradient {
  Eigen::VectorXd mean;  // per-step mean increment
  Eigen::VectorXd se;    // ratio-estimator standard error
  long long episodes = 0;
  long long steps = 0;
};

/// Per-step mean of rho_t M_t delta_t grad ln pi(S_t, A_t) under the behaviour
/// policy, with an oracle critic and a fixed target policy.
McGradient mc_ace_gradient(const DiscreteEnv& env, const SoftmaxLinearPolicy& policy,
                           double lambda_a, long long episodes, std::uint64_t seed,
                           Execution exec = Execution::Parallel, int chunk_episodes = 2048);

struct McEmphasis {
  Eigen::VectorXd weighted;  // d_mu(s) * mean(M_t | S_t = s)
  Eigen::VectorXd visits;
  long long steps = 0;
};

McEmphasis mc_emphasis(const DiscreteEnv& env, const SoftmaxLinearPolicy& policy, double lambda_a,
                       long long episodes, std::uint64_t seed,
                       Execution exec = Execution::Parallel, int chunk_episodes = 2048);

/// Per-step mean of w(S_t) x(S_t) dq/da at the deterministic action, w = 1
/// (DPG) or m/d_mu (True-DPGE).
McGradient mc_dpg_gradient(const ContinuousEnv& env, const DeterministicLinearPolicy& policy,
                           DpgWeighting weighting, long long episodes, std::uint64_t seed,
                           Execution exec = Execution::Parallel, int chunk_episodes = 2048);

/// Seed for chunk `index` derived from a base seed (splitmix64).
std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace emphatic
