#include "emphatic/policies.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "emphatic/errors.hpp"

namespace emphatic {

double softplus(double z) {
  if (z > 30.0) return z;
  return std::log1p(std::exp(z));
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double normal_log_density(double a, double mean, double std) {
  const double u = (a - mean) / std;
  return -0.5 * u * u - std::log(std) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double normal_density(double a, double mean, double std) {
  const double u = (a - mean) / std;
  return std::exp(-0.5 * u * u) / (std * std::sqrt(2.0 * std::numbers::pi));
}

int sample_categorical(const Eigen::VectorXd& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  const int n = static_cast<int>(probs.size());
  for (int a = 0; a < n; ++a) {
    acc += probs(a);
    if (u < acc) return a;
  }
  // u landed in the rounding slack above the cumulative sum
  for (int a = n - 1; a >= 0; --a) {
    if (probs(a) > 0.0) return a;
  }
  return n - 1;
}

// ---------------------------------------------------------------------------
// SoftmaxLinearPolicy

SoftmaxLinearPolicy::SoftmaxLinearPolicy(int n_actions, int n_features)
    : n_actions_(n_actions),
      n_features_(n_features),
      theta_(Eigen::VectorXd::Zero(n_actions * n_features)) {}

SoftmaxLinearPolicy::SoftmaxLinearPolicy(int n_actions, int n_features, Eigen::VectorXd theta)
    : n_actions_(n_actions), n_features_(n_features), theta_(std::move(theta)) {
  if (theta_.size() != n_actions * n_features)
    throw ValidationError("softmax parameter vector has wrong length");
}

void SoftmaxLinearPolicy::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != theta_.size())
    throw ValidationError("softmax parameter vector has wrong length");
  theta_ = theta;
}

void SoftmaxLinearPolicy::add_to_parameters(const Eigen::VectorXd& delta) { theta_ += delta; }

Eigen::VectorXd SoftmaxLinearPolicy::probabilities(const Eigen::VectorXd& x) const {
  Eigen::VectorXd pref(n_actions_);
  for (int a = 0; a < n_actions_; ++a)
    pref(a) = theta_.segment(a * n_features_, n_features_).dot(x);
  const double top = pref.maxCoeff();
  Eigen::VectorXd p = (pref.array() - top).exp();
  return p / p.sum();
}

double SoftmaxLinearPolicy::probability(const Eigen::VectorXd& x, int a) const {
  return probabilities(x)(a);
}

PolicyTable SoftmaxLinearPolicy::table(const FeatureMap& features) const {
  PolicyTable out(features.rows(), n_actions_);
  for (Eigen::Index s = 0; s < features.rows(); ++s)
    out.row(s) = probabilities(features.row(s).transpose()).transpose();
  return out;
}

Eigen::VectorXd SoftmaxLinearPolicy::log_prob_grad(const Eigen::VectorXd& x, int a) const {
  const Eigen::VectorXd p = probabilities(x);
  if (p(a) < 1e-300)
    throw DegenerateProbability("pi(a|s) = " + std::to_string(p(a)) + " is too small for ln pi");
  Eigen::VectorXd g(dim());
  for (int b = 0; b < n_actions_; ++b) {
    const double coeff = (b == a ? 1.0 : 0.0) - p(b);
    g.segment(b * n_features_, n_features_) = coeff * x;
  }
  return g;
}

Eigen::MatrixXd SoftmaxLinearPolicy::prob_jacobian(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd p = probabilities(x);
  Eigen::MatrixXd jac(n_actions_, dim());
  for (int a = 0; a < n_actions_; ++a) {
    for (int b = 0; b < n_actions_; ++b) {
      const double coeff = p(a) * ((a == b ? 1.0 : 0.0) - p(b));
      jac.block(a, b * n_features_, 1, n_features_) = coeff * x.transpose();
    }
  }
  return jac;
}

int SoftmaxLinearPolicy::sample(const Eigen::VectorXd& x, std::mt19937_64& rng) const {
  return sample_categorical(probabilities(x), rng);
}

// ---------------------------------------------------------------------------
// GaussianLinearPolicy

GaussianLinearPolicy::GaussianLinearPolicy(int n_features)
    : n_features_(n_features), params_(Eigen::VectorXd::Zero(2 * n_features)) {}

GaussianLinearPolicy::GaussianLinearPolicy(int n_features, Eigen::VectorXd params)
    : n_features_(n_features), params_(std::move(params)) {
  if (params_.size() != 2 * n_features)
    throw ValidationError("gaussian parameter vector has wrong length");
}

void GaussianLinearPolicy::set_parameters(const Eigen::VectorXd& params) {
  if (params.size() != params_.size())
    throw ValidationError("gaussian parameter vector has wrong length");
  params_ = params;
}

void GaussianLinearPolicy::add_to_parameters(const Eigen::VectorXd& delta) { params_ += delta; }

double GaussianLinearPolicy::mean(const Eigen::VectorXd& x) const {
  return params_.head(n_features_).dot(x);
}

double GaussianLinearPolicy::stddev(const Eigen::VectorXd& x) const {
  return softplus(params_.tail(n_features_).dot(x));
}

double GaussianLinearPolicy::density(const Eigen::VectorXd& x, double a) const {
  return normal_density(a, mean(x), stddev(x));
}

double GaussianLinearPolicy::log_density(const Eigen::VectorXd& x, double a) const {
  return normal_log_density(a, mean(x), stddev(x));
}

Eigen::VectorXd GaussianLinearPolicy::log_prob_grad(const Eigen::VectorXd& x, double a) const {
  const double m = mean(x);
  const double z = params_.tail(n_features_).dot(x);
  const double sd = softplus(z);
  const double diff = a - m;
  Eigen::VectorXd g(dim());
  g.head(n_features_) = (diff / (sd * sd)) * x;
  // d softplus(z)/dz = logistic(z)
  g.tail(n_features_) = ((diff * diff) / (sd * sd * sd) - 1.0 / sd) * logistic(z) * x;
  return g;
}

double GaussianLinearPolicy::sample(const Eigen::VectorXd& x, std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  return mean(x) + stddev(x) * normal(rng);
}

// ---------------------------------------------------------------------------
// DeterministicLinearPolicy

DeterministicLinearPolicy::DeterministicLinearPolicy(int n_features)
    : theta_(Eigen::VectorXd::Zero(n_features)) {}

DeterministicLinearPolicy::DeterministicLinearPolicy(int n_features, Eigen::VectorXd theta)
    : theta_(std::move(theta)) {
  if (theta_.size() != n_features)
    throw ValidationError("deterministic parameter vector has wrong length");
}

void DeterministicLinearPolicy::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != theta_.size())
    throw ValidationError("deterministic parameter vector has wrong length");
  theta_ = theta;
}

void DeterministicLinearPolicy::add_to_parameters(const Eigen::VectorXd& delta) {
  theta_ += delta;
}

// ---------------------------------------------------------------------------

double importance_ratio(const SoftmaxLinearPolicy& pi, const PolicyTable& mu,
                        const Eigen::VectorXd& x, int s, int a) {
  const double behaviour = mu(s, a);
  if (!(behaviour > 0.0))
    throw ZeroBehaviourDensity("mu(" + std::to_string(s) + ", " + std::to_string(a) +
                               ") is zero");
  return pi.probability(x, a) / behaviour;
}

double importance_ratio(const GaussianLinearPolicy& pi, const GaussianBehaviour& mu,
                        const Eigen::VectorXd& x, int s, double a) {
  const double mu_std = std::sqrt(mu.variance(s));
  const double log_mu = normal_log_density(a, mu.mean(s), mu_std);
  if (!(log_mu > std::log(1e-300)))
    throw ZeroBehaviourDensity("behaviour density underflows at a = " + std::to_string(a));
  return std::exp(pi.log_density(x, a) - log_mu);
}

}  // namespace emphatic
