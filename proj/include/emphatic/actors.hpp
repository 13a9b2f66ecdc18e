#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "emphatic/errors.hpp"
#include "emphatic/mdp.hpp"
#include "emphatic/policies.hpp"

namespace emphatic {

// Online follow-on trace F_t and emphasis M_t.
//
//   F_t = gamma_t rho_{t-1} F_{t-1} + i(S_t)
//   M_t = (1 - lambda_a) i(S_t) + lambda_a F_t
class EmphaticTrace {
 public:
  explicit EmphaticTrace(double lambda_a);

  /// Advances F and M for the current state; returns M.
  double update(double gamma_t, double interest);
  void set_rho(double rho) { rho_prev_ = rho; }
  /// Start of an episode: rho_{t-1} is reset to 1.
  void reset_rho() { rho_prev_ = 1.0; }

  double F() const { return f_; }
  double M() const { return m_; }
  double rho_prev() const { return rho_prev_; }
  double lambda_a() const { return lambda_a_; }

 private:
  double lambda_a_;
  double f_ = 0.0;
  double m_ = 0.0;
  double rho_prev_ = 1.0;
};

enum class AceBranch { TdError, AllActions };

template <typename Policy>
struct PolicyTraits;

template <>
struct PolicyTraits<SoftmaxLinearPolicy> {
  using Action = int;
  using Behaviour = PolicyTable;
};

template <>
struct PolicyTraits<GaussianLinearPolicy> {
  using Action = double;
  using Behaviour = GaussianBehaviour;
};

inline void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteUpdate(std::string(what) + " produced a non-finite update");
}

// Actor-Critic with Emphatic weightings over a stochastic linear policy.
//
// With lambda_a = 0 and unit interest this is the OffPAC actor.
template <typename Policy>
class AceActor {
 public:
  using Action = typename PolicyTraits<Policy>::Action;
  using Behaviour = typename PolicyTraits<Policy>::Behaviour;
  using Sample = Transition<Action>;

  AceActor(Policy policy, Behaviour behaviour, FeatureMap features, Eigen::VectorXd interest,
           double alpha, double lambda_a)
      : policy_(std::move(policy)),
        behaviour_(std::move(behaviour)),
        features_(std::move(features)),
        interest_(std::move(interest)),
        alpha_(alpha),
        trace_(lambda_a) {}

  const Policy& policy() const { return policy_; }
  Policy& policy() { return policy_; }
  const EmphaticTrace& trace() const { return trace_; }
  const FeatureMap& features() const { return features_; }
  double alpha() const { return alpha_; }
  double last_rho() const { return last_rho_; }

  Eigen::VectorXd feature(int s) const { return features_.row(s).transpose(); }

  double rho(const Sample& t) const {
    return importance_ratio(policy_, behaviour_, feature(t.state), t.state, t.action);
  }

  /// Trace update for sample t; returns M_t. Also records rho_t for the next step.
  double advance_trace(const Sample& t) {
    if (t.episode_start) trace_.reset_rho();
    const double gamma_t = t.episode_start ? 0.0 : gamma_prev_;
    const double m = trace_.update(gamma_t, interest_(t.state));
    last_rho_ = rho(t);
    trace_.set_rho(last_rho_);
    gamma_prev_ = t.gamma_next;
    return m;
  }

  /// td-error branch increment alpha rho_t M_t delta_t grad ln pi(S_t, A_t).
  Eigen::VectorXd propose(const Sample& t, double td_error) {
    const double m = advance_trace(t);
    return (alpha_ * last_rho_ * m * td_error) * policy_.log_prob_grad(feature(t.state), t.action);
  }

  /// All-actions branch: alpha M_t sum_b pi(b|s) (Q(s,b) - V(s)) grad ln pi(s,b).
  Eigen::VectorXd propose_all_actions(const Sample& t, const Eigen::VectorXd& q_hat,
                                      double v_hat)
    requires std::is_same_v<Policy, SoftmaxLinearPolicy>
  {
    const double m = advance_trace(t);
    const Eigen::VectorXd x = feature(t.state);
    const Eigen::VectorXd p = policy_.probabilities(x);
    Eigen::VectorXd inc = Eigen::VectorXd::Zero(policy_.dim());
    for (int b = 0; b < policy_.n_actions(); ++b) {
      if (p(b) == 0.0) continue;
      inc += (alpha_ * m * p(b) * (q_hat(b) - v_hat)) * policy_.log_prob_grad(x, b);
    }
    return inc;
  }

  /// td-error branch with M_t replaced by an exact per-state emphasis.
  Eigen::VectorXd propose_with_emphasis(const Sample& t, double td_error, double emphasis) {
    advance_trace(t);
    return (alpha_ * last_rho_ * emphasis * td_error) *
           policy_.log_prob_grad(feature(t.state), t.action);
  }

  void apply(const Eigen::VectorXd& inc) {
    require_finite(inc, "actor");
    policy_.add_to_parameters(inc);
  }

  Eigen::VectorXd step(const Sample& t, double td_error) {
    Eigen::VectorXd inc = propose(t, td_error);
    apply(inc);
    return inc;
  }

  Eigen::VectorXd step_all_actions(const Sample& t, const Eigen::VectorXd& q_hat, double v_hat)
    requires std::is_same_v<Policy, SoftmaxLinearPolicy>
  {
    Eigen::VectorXd inc = propose_all_actions(t, q_hat, v_hat);
    apply(inc);
    return inc;
  }

  /// True-ACE: emphasis = m(S_t) / d_mu(S_t) from an exact solve for the current policy.
  Eigen::VectorXd true_step(const Sample& t, double td_error, double emphasis) {
    Eigen::VectorXd inc = propose_with_emphasis(t, td_error, emphasis);
    apply(inc);
    return inc;
  }

 private:
  Policy policy_;
  Behaviour behaviour_;
  FeatureMap features_;
  Eigen::VectorXd interest_;
  double alpha_;
  EmphaticTrace trace_;
  double gamma_prev_ = 0.0;
  double last_rho_ = 1.0;
};

using SoftmaxAce = AceActor<SoftmaxLinearPolicy>;
using GaussianAce = AceActor<GaussianLinearPolicy>;

enum class DpgWeighting { Unit, ExactEmphasis };

// Deterministic policy gradient actor. The increment is
// alpha * w * grad_theta pi(s) * dq/da|_{a = pi(s)}, with w = 1 for DPG and
// m(s) / d_mu(s) for True-DPGE.
class DpgActor {
 public:
  DpgActor(DeterministicLinearPolicy policy, FeatureMap features, double alpha,
           DpgWeighting weighting)
      : policy_(std::move(policy)),
        features_(std::move(features)),
        alpha_(alpha),
        weighting_(weighting) {}

  const DeterministicLinearPolicy& policy() const { return policy_; }
  DpgWeighting weighting() const { return weighting_; }
  double alpha() const { return alpha_; }

  double action(int s) const { return policy_.action(features_.row(s).transpose()); }

  Eigen::VectorXd propose(const ContinuousTransition& t, double dq_da, double weight) const;
  Eigen::VectorXd step(const ContinuousTransition& t, double dq_da, double weight);
  void apply(const Eigen::VectorXd& inc);

 private:
  DeterministicLinearPolicy policy_;
  FeatureMap features_;
  double alpha_;
  DpgWeighting weighting_;
};

/// Emphasis used by True-ACE / True-DPGE: m(s) / d_mu(s), 0 where d_mu(s) = 0.
double exact_emphasis(const Eigen::VectorXd& m, const Eigen::VectorXd& d_mu, int s);

}  // namespace emphatic
