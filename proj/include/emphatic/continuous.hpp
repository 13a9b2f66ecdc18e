#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>

#include "emphatic/mdp.hpp"
#include "emphatic/policies.hpp"
#include "emphatic/quadrature.hpp"

namespace emphatic {

// Finite-state MDP with one real-valued action.
//
// Transition probabilities and rewards are smooth functions of the action;
// successors range over 0..n_states (terminal last). Discounts depend only on
// the (s, s') pair.
struct ContinuousActionMdp {
  using ActionFn = std::function<double(int s, double a, int next)>;

  int n_states = 0;
  ActionFn trans;
  ActionFn trans_da;
  ActionFn reward;
  ActionFn reward_da;
  Eigen::MatrixXd discount;  // n x (n + 1)
  Eigen::VectorXd start;
  Eigen::VectorXd interest;

  int terminal() const { return n_states; }
};

struct QuadratureOptions {
  const GaussHermite* rule = &default_quadrature();
  const GaussHermite* coarse = &coarse_quadrature();
  /// Allowed disagreement between the two rules when building the behaviour chain.
  double tolerance = 1e-9;
};

/// Behaviour restart chain with expectations over the Gaussian behaviour.
Eigen::MatrixXd restart_chain(const ContinuousActionMdp& mdp, const GaussianBehaviour& mu,
                              const QuadratureOptions& quad = {});

Eigen::VectorXd stationary_distribution(const ContinuousActionMdp& mdp,
                                        const GaussianBehaviour& mu,
                                        const QuadratureOptions& quad = {});

/// q(s, a) = sum_s' P(s,a,s') (r(s,a,s') + gamma(s,s') v(s')).
double action_value(const ContinuousActionMdp& mdp, const Eigen::VectorXd& v, int s, double a);
double action_value_da(const ContinuousActionMdp& mdp, const Eigen::VectorXd& v, int s, double a);

// ---------------------------------------------------------------------------
// Deterministic target policies: one action per state.

Eigen::MatrixXd deterministic_kernel(const ContinuousActionMdp& mdp,
                                     const Eigen::VectorXd& actions);
Eigen::VectorXd deterministic_values(const ContinuousActionMdp& mdp,
                                     const Eigen::VectorXd& actions);
double deterministic_objective(const ContinuousActionMdp& mdp, const Eigen::VectorXd& d_mu,
                               const Eigen::VectorXd& actions);
/// m(s') = d(s') i(s') + sum_s P(s, pi(s), s') gamma m(s)
Eigen::VectorXd deterministic_emphatic_weights(const ContinuousActionMdp& mdp,
                                               const Eigen::VectorXd& d_mu,
                                               const Eigen::VectorXd& actions);

struct DeterministicSolution {
  Eigen::VectorXd actions;
  Eigen::VectorXd v;
  Eigen::VectorXd dq_da;  // d q(s, a) / da at a = pi(s)
  Eigen::VectorXd m;
  double J = 0.0;
  Eigen::VectorXd grad;       // emphatic weighting
  Eigen::VectorXd semi_grad;  // d_mu i weighting
};

DeterministicSolution solve_deterministic(const ContinuousActionMdp& mdp,
                                          const Eigen::VectorXd& d_mu,
                                          const DeterministicLinearPolicy& policy,
                                          const FeatureMap& features);

/// sum_s m(s) grad_theta pi(s) dq/da|_{a = pi(s)}
Eigen::VectorXd deterministic_true_gradient(const ContinuousActionMdp& mdp,
                                            const Eigen::VectorXd& d_mu,
                                            const DeterministicLinearPolicy& policy,
                                            const FeatureMap& features);

// ---------------------------------------------------------------------------
// Gaussian target policies, expectations by Gauss-Hermite quadrature.

struct GaussianSolution {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  Eigen::MatrixXd kernel;
  Eigen::VectorXd v;
  Eigen::VectorXd m;
  Eigen::VectorXd m_lambda;
  double J = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd grad_lambda;
  Eigen::VectorXd semi_grad;
};

GaussianSolution solve_gaussian(const ContinuousActionMdp& mdp, const Eigen::VectorXd& d_mu,
                                const GaussianLinearPolicy& policy, const FeatureMap& features,
                                double lambda_a = 1.0, const GaussHermite& rule = default_quadrature());

double gaussian_objective(const ContinuousActionMdp& mdp, const Eigen::VectorXd& d_mu,
                          const GaussianLinearPolicy& policy, const FeatureMap& features,
                          const GaussHermite& rule = default_quadrature());

Eigen::VectorXd gaussian_values(const ContinuousActionMdp& mdp, const Eigen::VectorXd& means,
                                const Eigen::VectorXd& stddevs,
                                const GaussHermite& rule = default_quadrature());

// ---------------------------------------------------------------------------

class ContinuousStream {
 public:
  ContinuousStream(const ContinuousActionMdp& mdp, GaussianBehaviour behaviour,
                   std::uint64_t seed);

  ContinuousTransition next();
  std::mt19937_64& rng() { return rng_; }

 private:
  const ContinuousActionMdp* mdp_;
  GaussianBehaviour behaviour_;
  std::mt19937_64 rng_;
  int state_ = 0;
  bool episode_start_ = true;
};

}  // namespace emphatic
