#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "emphatic/policies.hpp"

namespace emphatic {

// Finite MDP with transition-based rewards and discounts.
//
// Non-terminal states are 0..n_states-1; index n_states is the terminal state.
// trans/reward/discount have one row per (s, a) pair, at row s * n_actions + a,
// and one column per successor (terminal included).
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  Eigen::MatrixXd trans;
  Eigen::MatrixXd reward;
  Eigen::MatrixXd discount;
  Eigen::VectorXd start;
  Eigen::VectorXd interest;

  TabularMdp() = default;
  TabularMdp(int states, int actions);

  int terminal() const { return n_states; }
  Eigen::Index row(int s, int a) const { return static_cast<Eigen::Index>(s) * n_actions + a; }

  double p(int s, int a, int next) const { return trans(row(s, a), next); }
  double r(int s, int a, int next) const { return reward(row(s, a), next); }
  double gamma(int s, int a, int next) const { return discount(row(s, a), next); }
};

/// Every invariant violation in `mdp`, one message each. Empty means valid.
std::vector<std::string> check_mdp(const TabularMdp& mdp);
/// Throws ValidationError listing the first violations.
void validate_mdp(const TabularMdp& mdp);
void validate_policy_table(const PolicyTable& table, int n_states, int n_actions,
                           const std::string& what);

template <typename Action>
struct Transition {
  int state = 0;
  Action action{};
  int next_state = 0;
  double reward = 0.0;
  double gamma_next = 0.0;
  bool episode_start = false;
};

using DiscreteTransition = Transition<int>;
using ContinuousTransition = Transition<double>;

// Episodic interaction as one continuing stream: entering the terminal state
// emits gamma_next = 0 and the following sample starts a new episode.
class TabularStream {
 public:
  TabularStream(const TabularMdp& mdp, PolicyTable behaviour, std::uint64_t seed);

  DiscreteTransition next();
  int state() const { return state_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  const TabularMdp* mdp_;
  PolicyTable behaviour_;
  std::mt19937_64 rng_;
  int state_ = 0;
  bool episode_start_ = true;
};

int sample_start_state(const Eigen::VectorXd& start, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Exact solvers

/// Solves A X = B by partial-pivot LU; throws SingularSystem when the
/// reciprocal condition estimate is below 1e-12.
Eigen::MatrixXd solve_dense(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const char* what);

/// Behaviour chain over non-terminal states with terminal entries redirected
/// to the start distribution.
Eigen::MatrixXd restart_chain(const TabularMdp& mdp, const PolicyTable& mu);

/// Stationary distribution of a row-stochastic chain.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& chain);
Eigen::VectorXd stationary_distribution(const TabularMdp& mdp, const PolicyTable& mu);

/// P_{pi,gamma}(s, s') = sum_a pi(s,a) P(s,a,s') gamma(s,a,s') over non-terminal s'.
Eigen::MatrixXd policy_kernel(const TabularMdp& mdp, const PolicyTable& pi);

/// r_pi(s) = sum_a pi(s,a) sum_s' P(s,a,s') r(s,a,s')
Eigen::VectorXd expected_reward(const TabularMdp& mdp, const PolicyTable& pi);

struct Values {
  Eigen::VectorXd v;  // non-terminal states
  Eigen::MatrixXd q;  // state x action
};

Values solve_values(const TabularMdp& mdp, const PolicyTable& pi);

/// d_mu(s) * i(s)
Eigen::VectorXd weighted_interest(const Eigen::VectorXd& d_mu, const Eigen::VectorXd& interest);

/// m_lambda^T = i^T (I - P)^{-1} (I - (1 - lambda) P) for the given kernel.
Eigen::VectorXd emphatic_weights(const Eigen::MatrixXd& kernel,
                                 const Eigen::VectorXd& weighted_interest, double lambda_a);
Eigen::VectorXd emphatic_weights(const TabularMdp& mdp, const Eigen::VectorXd& d_mu,
                                 const PolicyTable& pi, double lambda_a);

double objective(const TabularMdp& mdp, const Eigen::VectorXd& d_mu, const PolicyTable& pi);

/// Rows g(s) = sum_a d pi(s,a)/d theta * q(s,a). `jacobians[s]` is actions x dim.
Eigen::MatrixXd state_gradients(const std::vector<Eigen::MatrixXd>& jacobians,
                                const Eigen::MatrixXd& q);

/// Per-state value gradients: solves V = G + P V.
Eigen::MatrixXd value_gradients(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& g);

/// sum_s m_lambda(s) g(s). lambda_a = 1 is the true gradient, 0 the semi-gradient.
Eigen::VectorXd true_gradient(const TabularMdp& mdp, const Eigen::VectorXd& d_mu,
                              const PolicyTable& pi,
                              const std::vector<Eigen::MatrixXd>& jacobians, double lambda_a);

std::vector<Eigen::MatrixXd> policy_jacobians(const SoftmaxLinearPolicy& policy,
                                              const FeatureMap& features);

Eigen::VectorXd true_gradient(const TabularMdp& mdp, const Eigen::VectorXd& d_mu,
                              const SoftmaxLinearPolicy& policy, const FeatureMap& features,
                              double lambda_a);

struct ExactSolution {
  Eigen::VectorXd d_mu;
  Eigen::VectorXd v;
  Eigen::MatrixXd q;
  Eigen::MatrixXd kernel;
  Eigen::VectorXd m;         // lambda_a = 1
  Eigen::VectorXd m_lambda;  // requested lambda_a
  double J = 0.0;
  Eigen::VectorXd grad;       // lambda_a = 1
  Eigen::VectorXd semi_grad;  // lambda_a = 0
  Eigen::VectorXd grad_lambda;
};

ExactSolution solve_exact(const TabularMdp& mdp, const Eigen::VectorXd& d_mu,
                          const SoftmaxLinearPolicy& policy, const FeatureMap& features,
                          double lambda_a = 1.0);

/// || m^T - i^T - m^T P ||_inf
double fixed_point_residual(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& weighted_interest,
                            const Eigen::VectorXd& m);

}  // namespace emphatic
