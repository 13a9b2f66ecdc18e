#include "emphatic/critics.hpp"

#include <cmath>

#include "emphatic/errors.hpp"

namespace emphatic {

void TabularOracleCritic::refresh(const PolicyTable& pi) { values_ = solve_values(*mdp_, pi); }

double TabularOracleCritic::value(int s) const {
  return s >= mdp_->n_states ? 0.0 : values_.v(s);
}

void ContinuousOracleCritic::refresh_deterministic(const Eigen::VectorXd& actions) {
  v_ = deterministic_values(*mdp_, actions);
}

void ContinuousOracleCritic::refresh_gaussian(const Eigen::VectorXd& means,
                                              const Eigen::VectorXd& stddevs) {
  v_ = gaussian_values(*mdp_, means, stddevs, *rule_);
}

double ContinuousOracleCritic::value(int s) const {
  return s >= mdp_->n_states ? 0.0 : v_(s);
}

// ---------------------------------------------------------------------------

FeatureMap one_hot_features(int n_states) {
  return FeatureMap::Identity(n_states, n_states);
}

GtdCritic::GtdCritic(FeatureMap features, GtdParams params)
    : features_(std::move(features)),
      params_(params),
      v_(Eigen::VectorXd::Zero(features_.cols())),
      w_(Eigen::VectorXd::Zero(features_.cols())),
      e_(Eigen::VectorXd::Zero(features_.cols())) {
  if (params_.lambda_c < 0.0 || params_.lambda_c > 1.0)
    throw ValidationError("critic lambda must lie in [0, 1]");
}

Eigen::VectorXd GtdCritic::feature(int s) const {
  if (s >= features_.rows()) return Eigen::VectorXd::Zero(features_.cols());
  return features_.row(s).transpose();
}

double GtdCritic::value(int s) const {
  if (s >= features_.rows()) return 0.0;
  return features_.row(s).dot(v_);
}

double GtdCritic::update_impl(int s, int next, double reward, double gamma_next,
                              bool episode_start, double rho) {
  const Eigen::VectorXd x = feature(s);
  const Eigen::VectorXd x_next = feature(next);
  const double delta = reward + gamma_next * x_next.dot(v_) - x.dot(v_);

  const double gamma_t = episode_start ? 0.0 : gamma_prev_;
  if (episode_start) e_.setZero();
  e_ = rho * (gamma_t * params_.lambda_c * e_ + x);

  const double ew = e_.dot(w_);
  const double xw = x.dot(w_);
  v_ += params_.alpha_v * (delta * e_ - gamma_next * (1.0 - params_.lambda_c) * ew * x_next);
  w_ += params_.alpha_w * (delta * e_ - xw * x);
  gamma_prev_ = gamma_next;

  const double limit = 1e100;
  if (!v_.allFinite() || !w_.allFinite() || v_.cwiseAbs().maxCoeff() > limit ||
      w_.cwiseAbs().maxCoeff() > limit)
    throw DivergenceDetected("GTD critic weights diverged");
  return delta;
}

}  // namespace emphatic
