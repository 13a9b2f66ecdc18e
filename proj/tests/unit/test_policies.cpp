#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "emphatic/errors.hpp"
#include "emphatic/policies.hpp"

using namespace emphatic;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// theta with pi(A0 | x = [0, 1]) = 0.9
Eigen::VectorXd point_nine_theta() {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(4);
  theta(1) = std::log(9.0);
  return theta;
}

double normal_pdf_oracle(double a, double mean, double sd) {
  const double z = (a - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

TEST(Softmax, UniformPolicyGradientIsHalfFeature) {
  SoftmaxLinearPolicy pi(2, 2);
  const Eigen::VectorXd x = vec2(1.0, 0.0);
  const Eigen::VectorXd g = pi.log_prob_grad(x, 0);
  EXPECT_DOUBLE_EQ(g(0), 0.5);
  EXPECT_DOUBLE_EQ(g(1), 0.0);
  EXPECT_DOUBLE_EQ(g(2), -0.5);
  EXPECT_DOUBLE_EQ(g(3), 0.0);
  const Eigen::VectorXd g1 = pi.log_prob_grad(x, 1);
  EXPECT_DOUBLE_EQ(g1(0), -0.5);
  EXPECT_DOUBLE_EQ(g1(2), 0.5);
}

TEST(Softmax, GradientAtPointNine) {
  SoftmaxLinearPolicy pi(2, 2, point_nine_theta());
  const Eigen::VectorXd x = vec2(0.0, 1.0);
  EXPECT_NEAR(pi.probability(x, 0), 0.9, 1e-15);
  const Eigen::VectorXd g = pi.log_prob_grad(x, 0);
  EXPECT_NEAR(g(0), 0.0, 1e-15);
  EXPECT_NEAR(g(1), 0.1, 1e-15);
  EXPECT_NEAR(g(2), 0.0, 1e-15);
  EXPECT_NEAR(g(3), -0.1, 1e-15);
}

TEST(Softmax, LogProbGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int actions = 3, k = 4;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd theta(actions * k), x(k);
    for (int i = 0; i < theta.size(); ++i) theta(i) = normal(rng);
    for (int i = 0; i < k; ++i) x(i) = normal(rng);
    const int a = trial % actions;
    SoftmaxLinearPolicy pi(actions, k, theta);
    const Eigen::VectorXd g = pi.log_prob_grad(x, a);
    Eigen::VectorXd fd(theta.size());
    const double h = 1e-5;
    for (int i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd hi = theta, lo = theta;
      hi(i) += h;
      lo(i) -= h;
      fd(i) = (std::log(SoftmaxLinearPolicy(actions, k, hi).probability(x, a)) -
               std::log(SoftmaxLinearPolicy(actions, k, lo).probability(x, a))) /
              (2 * h);
    }
    EXPECT_LE((g - fd).norm() / fd.norm(), 1e-7) << "trial " << trial;
  }
}

TEST(Softmax, ProbabilityGradientsSumToZero) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd theta(3 * 2);
    for (int i = 0; i < theta.size(); ++i) theta(i) = normal(rng);
    SoftmaxLinearPolicy pi(3, 2, theta);
    const Eigen::VectorXd x = vec2(normal(rng), normal(rng));
    EXPECT_LE(pi.prob_jacobian(x).colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(pi.probabilities(x).sum(), 1.0, 1e-15);
  }
}

TEST(Softmax, JacobianRowsAreProbabilityTimesScore) {
  SoftmaxLinearPolicy pi(2, 2, point_nine_theta());
  const Eigen::VectorXd x = vec2(0.3, 1.0);
  const Eigen::MatrixXd jac = pi.prob_jacobian(x);
  for (int a = 0; a < 2; ++a) {
    const Eigen::VectorXd expected = pi.probability(x, a) * pi.log_prob_grad(x, a);
    EXPECT_LE((jac.row(a).transpose() - expected).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Softmax, LargePreferencesStayNormalised) {
  Eigen::VectorXd theta(4);
  theta << 1000.0, 0.0, -1000.0, 0.0;
  SoftmaxLinearPolicy pi(2, 2, theta);
  const Eigen::VectorXd p = pi.probabilities(vec2(1.0, 0.0));
  EXPECT_TRUE(p.allFinite());
  EXPECT_DOUBLE_EQ(p.sum(), 1.0);
  EXPECT_LT(p(1), 1e-300);
  EXPECT_THROW(pi.log_prob_grad(vec2(1.0, 0.0), 1), DegenerateProbability);
  EXPECT_NO_THROW(pi.log_prob_grad(vec2(1.0, 0.0), 0));
}

TEST(Softmax, AliasedStatesShareTheirPolicy) {
  SoftmaxLinearPolicy pi(2, 2, point_nine_theta());
  Eigen::MatrixXd features(3, 2);
  features << 1, 0, 0, 1, 0, 1;
  const PolicyTable table = pi.table(features);
  EXPECT_EQ(table.row(1), table.row(2));
}

TEST(Softmax, SamplingFrequencyMatchesProbability) {
  SoftmaxLinearPolicy pi(2, 2, point_nine_theta());
  std::mt19937_64 rng(11);
  const Eigen::VectorXd x = vec2(0.0, 1.0);
  const int draws = 1000000;
  int zeros = 0;
  for (int i = 0; i < draws; ++i) zeros += pi.sample(x, rng) == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / draws, 0.9, 0.002);
}

TEST(Softmax, RejectsWrongParameterSize) {
  EXPECT_THROW(SoftmaxLinearPolicy(2, 2, Eigen::VectorXd::Zero(3)), ValidationError);
}

TEST(ImportanceRatio, DiscreteExamples) {
  SoftmaxLinearPolicy pi(2, 2, point_nine_theta());
  PolicyTable mu(3, 2);
  mu << 0.25, 0.75, 0.25, 0.75, 0.25, 0.75;
  EXPECT_NEAR(importance_ratio(pi, mu, vec2(0.0, 1.0), 1, 0), 3.6, 1e-14);
  SoftmaxLinearPolicy uniform(2, 2);
  PolicyTable half = PolicyTable::Constant(3, 2, 0.5);
  EXPECT_DOUBLE_EQ(importance_ratio(uniform, half, vec2(1.0, 0.0), 0, 1), 1.0);
  PolicyTable hole = mu;
  hole(1, 0) = 0.0;
  hole(1, 1) = 1.0;
  EXPECT_THROW(importance_ratio(pi, hole, vec2(0.0, 1.0), 1, 0), ZeroBehaviourDensity);
}

TEST(ImportanceRatio, GaussianMatchesDensityOracle) {
  GaussianLinearPolicy pi(2);  // mean 0, std ln 2
  GaussianBehaviour mu{Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)};
  const Eigen::VectorXd x = vec2(1.0, 0.0);
  for (double a : {-2.0, 0.0, 1.0, 2.5}) {
    const double expected = normal_pdf_oracle(a, 0.0, std::log(2.0)) / normal_pdf_oracle(a, 1.0, 1.0);
    EXPECT_NEAR(importance_ratio(pi, mu, x, 0, a) / expected, 1.0, 1e-10) << a;
  }
  GaussianBehaviour narrow{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 1e-4)};
  EXPECT_THROW(importance_ratio(pi, narrow, x, 0, 50.0), ZeroBehaviourDensity);
}

TEST(Gaussian, ZeroStdWeightsGiveLogTwo) {
  GaussianLinearPolicy pi(2);
  EXPECT_DOUBLE_EQ(pi.stddev(vec2(1.0, 0.0)), std::log(2.0));
  EXPECT_DOUBLE_EQ(pi.mean(vec2(1.0, 0.0)), 0.0);
}

TEST(Gaussian, SoftplusOverflowBranch) {
  EXPECT_DOUBLE_EQ(softplus(31.0), 31.0);
  EXPECT_DOUBLE_EQ(softplus(1000.0), 1000.0);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-16);
  EXPECT_NEAR(softplus(30.0), std::log1p(std::exp(30.0)), 1e-12);
  EXPECT_GT(softplus(-800.0), -1.0);
  EXPECT_GE(softplus(-800.0), 0.0);
}

TEST(Gaussian, DensityMatchesOracle) {
  Eigen::VectorXd params(4);
  params << 0.4, -1.2, 0.3, 0.8;
  GaussianLinearPolicy pi(2, params);
  const Eigen::VectorXd x = vec2(0.5, 1.5);
  const double mean = 0.4 * 0.5 - 1.2 * 1.5;
  const double sd = std::log1p(std::exp(0.3 * 0.5 + 0.8 * 1.5));
  EXPECT_NEAR(pi.mean(x), mean, 1e-15);
  EXPECT_NEAR(pi.stddev(x), sd, 1e-15);
  EXPECT_NEAR(pi.density(x, 0.7) / normal_pdf_oracle(0.7, mean, sd), 1.0, 1e-12);
}

TEST(Gaussian, LogProbGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd params(4);
    for (int i = 0; i < 4; ++i) params(i) = normal(rng);
    const Eigen::VectorXd x = vec2(normal(rng), normal(rng));
    GaussianLinearPolicy pi(2, params);
    const double a = pi.mean(x) + normal(rng) * pi.stddev(x);
    const Eigen::VectorXd g = pi.log_prob_grad(x, a);
    Eigen::VectorXd fd(4);
    const double h = 1e-5;
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd hi = params, lo = params;
      hi(i) += h;
      lo(i) -= h;
      fd(i) = (GaussianLinearPolicy(2, hi).log_density(x, a) -
               GaussianLinearPolicy(2, lo).log_density(x, a)) /
              (2 * h);
    }
    EXPECT_LE((g - fd).norm() / fd.norm(), 1e-7) << "trial " << trial;
  }
}

TEST(Gaussian, SamplesHaveTheRightMoments) {
  Eigen::VectorXd params(4);
  params << 0.5, 0.0, 0.2, 0.0;
  GaussianLinearPolicy pi(2, params);
  const Eigen::VectorXd x = vec2(2.0, 0.0);
  std::mt19937_64 rng(9);
  const int draws = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double a = pi.sample(x, rng);
    sum += a;
    sq += a * a;
  }
  const double mean = sum / draws;
  const double var = sq / draws - mean * mean;
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(std::sqrt(var), pi.stddev(x), 0.01);
}

TEST(Deterministic, GradientIsFeatureAndSamplingIsConstant) {
  Eigen::VectorXd theta = vec2(0.3, -2.0);
  DeterministicLinearPolicy pi(2, theta);
  const Eigen::VectorXd x = vec2(1.5, 0.25);
  EXPECT_EQ(pi.action_grad(x), x);
  EXPECT_DOUBLE_EQ(pi.action(x), 0.3 * 1.5 - 2.0 * 0.25);
  std::mt19937_64 rng(1);
  const double first = pi.sample(x, rng);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(pi.sample(x, rng), first);
  // finite differences of the action
  const double h = 1e-5;
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd hi = theta, lo = theta;
    hi(i) += h;
    lo(i) -= h;
    const double fd = (DeterministicLinearPolicy(2, hi).action(x) - DeterministicLinearPolicy(2, lo).action(x)) / (2 * h);
    EXPECT_NEAR(fd, x(i), 1e-7 * std::abs(x(i)));
  }
}

TEST(Categorical, InverseCdfDraws) {
  Eigen::VectorXd p(3);
  p << 0.2, 0.0, 0.8;
  std::mt19937_64 rng(4);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 100000; ++i) ++counts[sample_categorical(p, rng)];
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[0] / 1e5, 0.2, 0.005);
}
