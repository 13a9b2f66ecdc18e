#pragma once

#include <Eigen/Dense>
#include <random>

namespace emphatic {

/// One feature row per state. States with identical rows are aliased.
using FeatureMap = Eigen::MatrixXd;

/// Row-stochastic state x action probability table.
using PolicyTable = Eigen::MatrixXd;

/// Gaussian behaviour over a scalar action, one (mean, variance) per state.
struct GaussianBehaviour {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

double softplus(double z);
double logistic(double z);
double normal_density(double a, double mean, double std);
double normal_log_density(double a, double mean, double std);

// Softmax over a linear transformation of features.
//
// Parameters are stored flattened row-major: theta[a * k + j] is the weight of
// feature j in the preference for action a.
class SoftmaxLinearPolicy {
 public:
  SoftmaxLinearPolicy(int n_actions, int n_features);
  SoftmaxLinearPolicy(int n_actions, int n_features, Eigen::VectorXd theta);

  int n_actions() const { return n_actions_; }
  int n_features() const { return n_features_; }
  int dim() const { return static_cast<int>(theta_.size()); }

  const Eigen::VectorXd& parameters() const { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta);
  void add_to_parameters(const Eigen::VectorXd& delta);

  Eigen::VectorXd probabilities(const Eigen::VectorXd& x) const;
  double probability(const Eigen::VectorXd& x, int a) const;

  /// Probabilities for every row of `features`.
  PolicyTable table(const FeatureMap& features) const;

  /// Gradient of ln pi(a|x); throws DegenerateProbability when pi(a|x) < 1e-300.
  Eigen::VectorXd log_prob_grad(const Eigen::VectorXd& x, int a) const;

  /// d pi(a|x) / d theta, one row per action.
  Eigen::MatrixXd prob_jacobian(const Eigen::VectorXd& x) const;

  int sample(const Eigen::VectorXd& x, std::mt19937_64& rng) const;

 private:
  int n_actions_;
  int n_features_;
  Eigen::VectorXd theta_;
};

// Gaussian with linear mean and softplus-linear standard deviation.
// Parameters: [w_mean (k), w_std (k)].
class GaussianLinearPolicy {
 public:
  explicit GaussianLinearPolicy(int n_features);
  GaussianLinearPolicy(int n_features, Eigen::VectorXd params);

  int n_features() const { return n_features_; }
  int dim() const { return 2 * n_features_; }

  const Eigen::VectorXd& parameters() const { return params_; }
  void set_parameters(const Eigen::VectorXd& params);
  void add_to_parameters(const Eigen::VectorXd& delta);

  double mean(const Eigen::VectorXd& x) const;
  double stddev(const Eigen::VectorXd& x) const;
  double density(const Eigen::VectorXd& x, double a) const;
  double log_density(const Eigen::VectorXd& x, double a) const;

  /// Gradient of ln pi(a|x) with respect to [w_mean, w_std].
  Eigen::VectorXd log_prob_grad(const Eigen::VectorXd& x, double a) const;

  double sample(const Eigen::VectorXd& x, std::mt19937_64& rng) const;

 private:
  int n_features_;
  Eigen::VectorXd params_;
};

/// pi(s; theta) = theta . x(s)
class DeterministicLinearPolicy {
 public:
  explicit DeterministicLinearPolicy(int n_features);
  DeterministicLinearPolicy(int n_features, Eigen::VectorXd theta);

  int n_features() const { return static_cast<int>(theta_.size()); }
  int dim() const { return static_cast<int>(theta_.size()); }

  const Eigen::VectorXd& parameters() const { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta);
  void add_to_parameters(const Eigen::VectorXd& delta);

  double action(const Eigen::VectorXd& x) const { return theta_.dot(x); }
  /// Every state's action.
  Eigen::VectorXd actions(const FeatureMap& features) const { return features * theta_; }
  Eigen::VectorXd action_grad(const Eigen::VectorXd& x) const { return x; }

  double sample(const Eigen::VectorXd& x, std::mt19937_64&) const { return action(x); }

 private:
  Eigen::VectorXd theta_;
};

/// pi(a|x) / mu(s, a). Throws ZeroBehaviourDensity when mu(s, a) is not positive.
double importance_ratio(const SoftmaxLinearPolicy& pi, const PolicyTable& mu,
                        const Eigen::VectorXd& x, int s, int a);

/// Density ratio of the target Gaussian to the behaviour Gaussian at state s.
double importance_ratio(const GaussianLinearPolicy& pi, const GaussianBehaviour& mu,
                        const Eigen::VectorXd& x, int s, double a);

/// Categorical draw from one row of a behaviour table.
int sample_categorical(const Eigen::VectorXd& probs, std::mt19937_64& rng);

}  // namespace emphatic
