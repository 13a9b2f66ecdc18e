#include "emphatic/continuous.hpp"

#include <cmath>

#include "emphatic/errors.hpp"

namespace emphatic {

Eigen::MatrixXd restart_chain(const ContinuousActionMdp& mdp, const GaussianBehaviour& mu,
                              const QuadratureOptions& quad) {
  const int n = mdp.n_states;
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    const double mean = mu.mean(s);
    const double sd = std::sqrt(mu.variance(s));
    for (int next = 0; next <= n; ++next) {
      const double p = checked_expectation(
          *quad.rule, *quad.coarse, [&](double a) { return mdp.trans(s, a, next); }, mean, sd,
          quad.tolerance);
      if (next == n)
        chain.row(s) += p * mdp.start.transpose();
      else
        chain(s, next) += p;
    }
  }
  return chain;
}

Eigen::VectorXd stationary_distribution(const ContinuousActionMdp& mdp,
                                        const GaussianBehaviour& mu,
                                        const QuadratureOptions& quad) {
  return stationary_distribution(restart_chain(mdp, mu, quad));
}

double action_value(const ContinuousActionMdp& mdp, const Eigen::VectorXd& v, int s, double a) {
  const int n = mdp.n_states;
  double q = 0.0;
  for (int next = 0; next <= n; ++next) {
    const double p = mdp.trans(s, a, next);
    if (p == 0.0) continue;
    const double cont = next < n ? mdp.discount(s, next) * v(next) : 0.0;
    q += p * (mdp.reward(s, a, next) + cont);
  }
  return q;
}

double action_value_da(const ContinuousActionMdp& mdp, const Eigen::VectorXd& v, int s,
                       double a) {
  const int n = mdp.n_states;
  double dq = 0.0;
  for (int next = 0; next <= n; ++next) {
    const double cont = next < n ? mdp.discount(s, next) * v(next) : 0.0;
    dq += mdp.trans_da(s, a, next) * (mdp.reward(s, a, next) + cont) +
          mdp.trans(s, a, next) * mdp.reward_da(s, a, next);
  }
  return dq;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd deterministic_kernel(const ContinuousActionMdp& mdp,
                                     const Eigen::VectorXd& actions) {
  const int n = mdp.n_states;
  Eigen::MatrixXd kernel(n, n);
  for (int s = 0; s < n; ++s)
    for (int next = 0; next < n; ++next)
      kernel(s, next) = mdp.trans(s, actions(s), next) * mdp.discount(s, next);
  return kernel;
}

Eigen::VectorXd deterministic_values(const ContinuousActionMdp& mdp,
                                     const Eigen::VectorXd& actions) {
  const int n = mdp.n_states;
  Eigen::VectorXd r(n);
  for (int s = 0; s < n; ++s) {
    r(s) = 0.0;
    for (int next = 0; next <= n; ++next)
      r(s) += mdp.trans(s, actions(s), next) * mdp.reward(s, actions(s), next);
  }
  return solve_dense(Eigen::MatrixXd::Identity(n, n) - deterministic_kernel(mdp, actions), r,
                     "deterministic value solve");
}

double deterministic_objective(const ContinuousActionMdp& mdp, const Eigen::VectorXd& d_mu,
                               const Eigen::VectorXd& actions) {
  return weighted_interest(d_mu, mdp.interest).dot(deterministic_values(mdp, actions));
}

Eigen::VectorXd deterministic_emphatic_weights(const ContinuousActionMdp& mdp,
                                               const Eigen::VectorXd& d_mu,
                                               const Eigen::VectorXd& actions) {
  return emphatic_weights(deterministic_kernel(mdp, actions),
                          weighted_interest(d_mu, mdp.interest), 1.0);
}

DeterministicSolution solve_deterministic(const ContinuousActionMdp& mdp,
                                          const Eigen::VectorXd& d_mu,
                                          const DeterministicLinearPolicy& policy,
                                          const FeatureMap& features) {
  const int n = mdp.n_states;
  DeterministicSolution out;
  out.actions = policy.actions(features);
  const Eigen::MatrixXd kernel = deterministic_kernel(mdp, out.actions);
  Eigen::VectorXd r(n);
  for (int s = 0; s < n; ++s) {
    r(s) = 0.0;
    for (int next = 0; next <= n; ++next)
      r(s) += mdp.trans(s, out.actions(s), next) * mdp.reward(s, out.actions(s), next);
  }
  out.v = solve_dense(Eigen::MatrixXd::Identity(n, n) - kernel, r, "deterministic value solve");
  const Eigen::VectorXd iw = weighted_interest(d_mu, mdp.interest);
  out.m = emphatic_weights(kernel, iw, 1.0);
  out.J = iw.dot(out.v);
  out.dq_da.resize(n);
  Eigen::MatrixXd g(n, policy.dim());
  for (int s = 0; s < n; ++s) {
    out.dq_da(s) = action_value_da(mdp, out.v, s, out.actions(s));
    g.row(s) = out.dq_da(s) * policy.action_grad(features.row(s).transpose()).transpose();
  }
  out.grad = g.transpose() * out.m;
  out.semi_grad = g.transpose() * iw;
  return out;
}

Eigen::VectorXd deterministic_true_gradient(const ContinuousActionMdp& mdp,
                                            const Eigen::VectorXd& d_mu,
                                            const DeterministicLinearPolicy& policy,
                                            const FeatureMap& features) {
  return solve_deterministic(mdp, d_mu, policy, features).grad;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd gaussian_kernel(const ContinuousActionMdp& mdp, const Eigen::VectorXd& means,
                                const Eigen::VectorXd& stddevs, const GaussHermite& rule) {
  const int n = mdp.n_states;
  Eigen::MatrixXd kernel(n, n);
  for (int s = 0; s < n; ++s)
    for (int next = 0; next < n; ++next)
      kernel(s, next) =
          mdp.discount(s, next) *
          rule.expectation([&](double a) { return mdp.trans(s, a, next); }, means(s), stddevs(s));
  return kernel;
}

Eigen::VectorXd gaussian_reward(const ContinuousActionMdp& mdp, const Eigen::VectorXd& means,
                                const Eigen::VectorXd& stddevs, const GaussHermite& rule) {
  const int n = mdp.n_states;
  Eigen::VectorXd r(n);
  for (int s = 0; s < n; ++s) {
    r(s) = rule.expectation(
        [&](double a) {
          double acc = 0.0;
          for (int next = 0; next <= n; ++next)
            acc += mdp.trans(s, a, next) * mdp.reward(s, a, next);
          return acc;
        },
        means(s), stddevs(s));
  }
  return r;
}

void policy_moments(const GaussianLinearPolicy& policy, const FeatureMap& features,
                    Eigen::VectorXd& means, Eigen::VectorXd& stddevs) {
  const auto n = features.rows();
  means.resize(n);
  stddevs.resize(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::VectorXd x = features.row(s).transpose();
    means(s) = policy.mean(x);
    stddevs(s) = policy.stddev(x);
  }
}

}  // namespace

Eigen::VectorXd gaussian_values(const ContinuousActionMdp& mdp, const Eigen::VectorXd& means,
                                const Eigen::VectorXd& stddevs, const GaussHermite& rule) {
  const int n = mdp.n_states;
  const Eigen::MatrixXd kernel = gaussian_kernel(mdp, means, stddevs, rule);
  return solve_dense(Eigen::MatrixXd::Identity(n, n) - kernel,
                     gaussian_reward(mdp, means, stddevs, rule), "gaussian value solve");
}

double gaussian_objective(const ContinuousActionMdp& mdp, const Eigen::VectorXd& d_mu,
                          const GaussianLinearPolicy& policy, const FeatureMap& features,
                          const GaussHermite& rule) {
  Eigen::VectorXd means;
  Eigen::VectorXd stddevs;
  policy_moments(policy, features, means, stddevs);
  return weighted_interest(d_mu, mdp.interest).dot(gaussian_values(mdp, means, stddevs, rule));
}

GaussianSolution solve_gaussian(const ContinuousActionMdp& mdp, const Eigen::VectorXd& d_mu,
                                const GaussianLinearPolicy& policy, const FeatureMap& features,
                                double lambda_a, const GaussHermite& rule) {
  const int n = mdp.n_states;
  GaussianSolution out;
  policy_moments(policy, features, out.mean, out.stddev);
  out.kernel = gaussian_kernel(mdp, out.mean, out.stddev, rule);
  out.v = solve_dense(Eigen::MatrixXd::Identity(n, n) - out.kernel,
                      gaussian_reward(mdp, out.mean, out.stddev, rule), "gaussian value solve");
  const Eigen::VectorXd iw = weighted_interest(d_mu, mdp.interest);
  out.m = emphatic_weights(out.kernel, iw, 1.0);
  out.m_lambda = emphatic_weights(out.kernel, iw, lambda_a);
  out.J = iw.dot(out.v);
  // g(s) = int grad pi(a|s) q(s,a) da = E_pi[grad ln pi(a|s) q(s,a)]
  Eigen::MatrixXd g(n, policy.dim());
  for (int s = 0; s < n; ++s) {
    const Eigen::VectorXd x = features.row(s).transpose();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(policy.dim());
    const double scale = std::numbers::sqrt2 * out.stddev(s);
    for (int i = 0; i < rule.size(); ++i) {
      const double a = out.mean(s) + scale * rule.nodes()(i);
      const double w = rule.weights()(i) / std::sqrt(std::numbers::pi);
      acc += w * action_value(mdp, out.v, s, a) * policy.log_prob_grad(x, a);
    }
    g.row(s) = acc.transpose();
  }
  out.grad = g.transpose() * out.m;
  out.grad_lambda = g.transpose() * out.m_lambda;
  out.semi_grad = g.transpose() * iw;
  return out;
}

// ---------------------------------------------------------------------------

ContinuousStream::ContinuousStream(const ContinuousActionMdp& mdp, GaussianBehaviour behaviour,
                                   std::uint64_t seed)
    : mdp_(&mdp), behaviour_(std::move(behaviour)), rng_(seed) {
  state_ = sample_start_state(mdp_->start, rng_);
}

ContinuousTransition ContinuousStream::next() {
  const int n = mdp_->n_states;
  ContinuousTransition t;
  t.state = state_;
  t.episode_start = episode_start_;
  std::normal_distribution<double> normal(0.0, 1.0);
  t.action = behaviour_.mean(state_) + std::sqrt(behaviour_.variance(state_)) * normal(rng_);
  Eigen::VectorXd probs(n + 1);
  for (int next = 0; next <= n; ++next) probs(next) = mdp_->trans(state_, t.action, next);
  t.next_state = sample_categorical(probs, rng_);
  t.reward = mdp_->reward(state_, t.action, t.next_state);
  if (t.next_state == n) {
    t.gamma_next = 0.0;
    state_ = sample_start_state(mdp_->start, rng_);
    episode_start_ = true;
  } else {
    t.gamma_next = mdp_->discount(state_, t.next_state);
    state_ = t.next_state;
    episode_start_ = false;
  }
  return t;
}

}  // namespace emphatic
