#pragma once

#include <Eigen/Dense>

#include "emphatic/continuous.hpp"
#include "emphatic/mdp.hpp"

namespace emphatic {

// Exact critic for a tabular MDP: values of the registered target policy.
class TabularOracleCritic {
 public:
  explicit TabularOracleCritic(const TabularMdp& mdp) : mdp_(&mdp) {}

  /// Recomputes v_pi and q_pi; call whenever the target policy changes.
  void refresh(const PolicyTable& pi);

  /// v_pi(s); 0 for the terminal state.
  double value(int s) const;
  double action_value(int s, int a) const { return values_.q(s, a); }
  const Values& values() const { return values_; }

  template <typename Action>
  double td_error(const Transition<Action>& t) const {
    return t.reward + t.gamma_next * value(t.next_state) - value(t.state);
  }

 private:
  const TabularMdp* mdp_;
  Values values_;
};

// Exact critic for a continuous-action MDP under a deterministic or Gaussian
// target policy.
class ContinuousOracleCritic {
 public:
  explicit ContinuousOracleCritic(const ContinuousActionMdp& mdp,
                                  const GaussHermite& rule = default_quadrature())
      : mdp_(&mdp), rule_(&rule) {}

  void refresh_deterministic(const Eigen::VectorXd& actions);
  void refresh_gaussian(const Eigen::VectorXd& means, const Eigen::VectorXd& stddevs);

  double value(int s) const;
  double action_value(int s, double a) const { return emphatic::action_value(*mdp_, v_, s, a); }
  double action_value_da(int s, double a) const {
    return emphatic::action_value_da(*mdp_, v_, s, a);
  }
  const Eigen::VectorXd& values() const { return v_; }

  template <typename Action>
  double td_error(const Transition<Action>& t) const {
    return t.reward + t.gamma_next * value(t.next_state) - value(t.state);
  }

 private:
  const ContinuousActionMdp* mdp_;
  const GaussHermite* rule_;
  Eigen::VectorXd v_;
};

struct GtdParams {
  double alpha_v = 0.01;
  double alpha_w = 1e-4;
  double lambda_c = 0.0;
};

// Linear GTD(lambda) state-value critic with per-decision importance sampling.
//
// Trace convention: e <- rho (gamma_t lambda e + x(s)), gamma_t being the
// discount into the current state (0 at episode starts).
class GtdCritic {
 public:
  /// `features` has one row per non-terminal state; the terminal state maps to zero.
  GtdCritic(FeatureMap features, GtdParams params);

  template <typename Action>
  double update(const Transition<Action>& t, double rho) {
    return update_impl(t.state, t.next_state, t.reward, t.gamma_next, t.episode_start, rho);
  }

  double value(int s) const;
  const Eigen::VectorXd& weights() const { return v_; }
  const Eigen::VectorXd& correction() const { return w_; }
  const Eigen::VectorXd& trace() const { return e_; }
  const GtdParams& params() const { return params_; }

 private:
  double update_impl(int s, int next, double reward, double gamma_next, bool episode_start,
                     double rho);
  Eigen::VectorXd feature(int s) const;

  FeatureMap features_;
  GtdParams params_;
  Eigen::VectorXd v_;
  Eigen::VectorXd w_;
  Eigen::VectorXd e_;
  double gamma_prev_ = 0.0;
};

/// Identity features: one indicator per non-terminal state.
FeatureMap one_hot_features(int n_states);

}  // namespace emphatic
