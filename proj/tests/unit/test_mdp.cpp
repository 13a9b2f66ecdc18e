#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "emphatic/envs.hpp"
#include "emphatic/errors.hpp"
#include "emphatic/mdp.hpp"
#include "oracles.hpp"

using namespace emphatic;

namespace {

// Target policy with pi(A0) = 0.9 everywhere in the three-state env.
SoftmaxLinearPolicy point_nine(int features) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(2 * features);
  theta.head(features).setConstant(std::log(9.0));
  return SoftmaxLinearPolicy(2, features, theta);
}

PolicyTable constant_table(int n, double p0) {
  PolicyTable t(n, 2);
  t.col(0).setConstant(p0);
  t.col(1).setConstant(1.0 - p0);
  return t;
}

}  // namespace

TEST(Stationary, ThreeStateBehaviour) {
  const DiscreteEnv env = make_three_state();
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  EXPECT_NEAR(d(0), 0.5, 1e-12);
  EXPECT_NEAR(d(1), 0.125, 1e-12);
  EXPECT_NEAR(d(2), 0.375, 1e-12);
}

TEST(Stationary, SingleStateSelfLoop) {
  Eigen::MatrixXd chain(1, 1);
  chain << 1.0;
  const Eigen::VectorXd d = stationary_distribution(chain);
  EXPECT_DOUBLE_EQ(d(0), 1.0);
}

TEST(Stationary, MatchesPowerIterationOnRandomMdps) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularMdp mdp = oracle::random_mdp(5, 3, rng);
    const PolicyTable mu = oracle::random_table(5, 3, rng);
    const Eigen::VectorXd d = stationary_distribution(mdp, mu);
    EXPECT_LE((d - oracle::stationary(mdp, mu)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(d.sum(), 1.0, 1e-12);
    EXPECT_TRUE((d.array() >= 0.0).all());
  }
}

TEST(Stationary, ReducibleChainIsNonConvergent) {
  Eigen::MatrixXd chain = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(stationary_distribution(chain), NonConvergent);
}

TEST(Kernel, ThreeStateEntries) {
  const DiscreteEnv env = make_three_state();
  const Eigen::MatrixXd k = policy_kernel(env.mdp, constant_table(3, 0.9));
  EXPECT_NEAR(k(0, 1), 0.9, 1e-15);
  EXPECT_NEAR(k(0, 2), 0.1, 1e-15);
  EXPECT_EQ(k.row(1).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(k.row(2).cwiseAbs().sum(), 0.0);
}

TEST(Kernel, ZeroDiscountGivesZeroKernel) {
  DiscreteEnv env = make_three_state();
  env.mdp.discount.setZero();
  EXPECT_EQ(policy_kernel(env.mdp, constant_table(3, 0.9)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Values, ThreeStateAtPointNine) {
  const DiscreteEnv env = make_three_state();
  const Values vals = solve_values(env.mdp, constant_table(3, 0.9));
  EXPECT_NEAR(vals.v(0), 1.63, 1e-12);
  EXPECT_NEAR(vals.v(1), 1.8, 1e-12);
  EXPECT_NEAR(vals.v(2), 0.1, 1e-12);
  EXPECT_NEAR(vals.q(0, 0), 1.8, 1e-12);
  EXPECT_NEAR(vals.q(0, 1), 0.1, 1e-12);
}

TEST(Values, DeterministicAllA0) {
  const DiscreteEnv env = make_three_state();
  const Values vals = solve_values(env.mdp, constant_table(3, 1.0));
  EXPECT_NEAR(vals.v(0), 2.0, 1e-14);
  EXPECT_NEAR(vals.v(1), 2.0, 1e-14);
  EXPECT_NEAR(vals.v(2), 0.0, 1e-14);
}

TEST(Values, ZeroRewardsGiveZeroValues) {
  DiscreteEnv env = make_three_state();
  env.mdp.reward.setZero();
  const Values vals = solve_values(env.mdp, constant_table(3, 0.3));
  EXPECT_EQ(vals.v.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(vals.q.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Values, MatchIterativeEvaluation) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularMdp mdp = oracle::random_mdp(6, 2, rng);
    const PolicyTable pi = oracle::random_table(6, 2, rng);
    const Values vals = solve_values(mdp, pi);
    EXPECT_LE((vals.v - oracle::values(mdp, pi)).cwiseAbs().maxCoeff(), 1e-10);
    // Bellman consistency of q with v
    for (int s = 0; s < 6; ++s) EXPECT_NEAR(pi.row(s).dot(vals.q.row(s)), vals.v(s), 1e-12);
  }
}

TEST(Values, NonTerminatingPolicyIsSingular) {
  TabularMdp mdp(1, 1);
  mdp.trans(0, 0) = 1.0;
  mdp.discount(0, 0) = 1.0;
  mdp.start(0) = 1.0;
  PolicyTable pi(1, 1);
  pi << 1.0;
  EXPECT_THROW(solve_values(mdp, pi), SingularSystem);
}

TEST(Emphasis, ThreeStateExamples) {
  const DiscreteEnv env = make_three_state();
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  const PolicyTable pi = constant_table(3, 0.9);
  const Eigen::VectorXd m = emphatic_weights(env.mdp, d, pi, 1.0);
  EXPECT_NEAR(m(0), 0.5, 1e-14);
  EXPECT_NEAR(m(1), 0.575, 1e-14);
  EXPECT_NEAR(m(2), 0.425, 1e-14);
  const Eigen::VectorXd m0 = emphatic_weights(env.mdp, d, pi, 0.0);
  const Eigen::VectorXd di = weighted_interest(d, env.mdp.interest);
  for (int s = 0; s < 3; ++s) EXPECT_EQ(m0(s), di(s));
  const Eigen::VectorXd mh = emphatic_weights(env.mdp, d, pi, 0.5);
  EXPECT_NEAR(mh(0), 0.5, 1e-14);
  EXPECT_NEAR(mh(1), 0.35, 1e-14);
  EXPECT_NEAR(mh(2), 0.4, 1e-14);
}

TEST(Emphasis, ZeroInterestGivesZeroWeights) {
  DiscreteEnv env = make_three_state();
  env.mdp.interest.setZero();
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  EXPECT_EQ(emphatic_weights(env.mdp, d, constant_table(3, 0.4), 1.0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Emphasis, MatchesNeumannSeriesAndFixedPoint) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularMdp mdp = oracle::random_mdp(5, 2, rng);
    const PolicyTable mu = oracle::random_table(5, 2, rng);
    const PolicyTable pi = oracle::random_table(5, 2, rng);
    const Eigen::VectorXd d = stationary_distribution(mdp, mu);
    const Eigen::VectorXd m = emphatic_weights(mdp, d, pi, 1.0);
    const Eigen::MatrixXd k = oracle::kernel(mdp, pi);
    const Eigen::VectorXd di = d.cwiseProduct(mdp.interest);
    EXPECT_LE((m - oracle::emphasis(k, di)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(fixed_point_residual(k, di, m), 1e-12);
    // lambda interpolates linearly between d i and m
    const Eigen::VectorXd m3 = emphatic_weights(mdp, d, pi, 0.3);
    EXPECT_LE((m3 - (0.3 * m + 0.7 * di)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Objective, ThreeStateValues) {
  const DiscreteEnv env = make_three_state();
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  EXPECT_NEAR(objective(env.mdp, d, constant_table(3, 0.9)), 1.0775, 1e-12);
  EXPECT_NEAR(objective(env.mdp, d, constant_table(3, 1.0)), 1.25, 1e-12);
  DiscreteEnv zero = env;
  zero.mdp.reward.setZero();
  EXPECT_EQ(objective(zero.mdp, d, constant_table(3, 0.9)), 0.0);
}

TEST(Gradient, ThreeStateTrueAndSemi) {
  const DiscreteEnv env = make_three_state();
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  const SoftmaxLinearPolicy pi = point_nine(2);
  const ExactSolution sol = solve_exact(env.mdp, d, pi, env.features, 0.5);
  EXPECT_NEAR(sol.grad(0), 0.0765, 1e-12);
  EXPECT_NEAR(sol.grad(1), 0.06525, 1e-12);
  EXPECT_NEAR(sol.grad(2), -0.0765, 1e-12);
  EXPECT_NEAR(sol.grad(3), -0.06525, 1e-12);
  EXPECT_NEAR(sol.semi_grad(1), -0.01125, 1e-12);
  EXPECT_GT(sol.grad(1), 0.0);
  EXPECT_LT(sol.semi_grad(1), 0.0);
  EXPECT_LE((sol.grad_lambda - 0.5 * (sol.grad + sol.semi_grad)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(sol.J, 1.0775, 1e-12);
}

TEST(Gradient, ZeroActionValuesGiveZeroGradient) {
  DiscreteEnv env = make_three_state();
  env.mdp.reward.setZero();
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  const Eigen::VectorXd g = true_gradient(env.mdp, d, point_nine(2), env.features, 1.0);
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradient, TrueGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const DiscreteEnv& env : {make_three_state(), make_eleven_state()}) {
    const int k = static_cast<int>(env.features.cols());
    const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd theta(2 * k);
      for (int i = 0; i < theta.size(); ++i) theta(i) = normal(rng);
      const Eigen::VectorXd g =
          true_gradient(env.mdp, d, SoftmaxLinearPolicy(2, k, theta), env.features, 1.0);
      Eigen::VectorXd fd(theta.size());
      const double h = 1e-5;
      for (int i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd hi = theta, lo = theta;
        hi(i) += h;
        lo(i) -= h;
        fd(i) = (objective(env.mdp, d, SoftmaxLinearPolicy(2, k, hi).table(env.features)) -
                 objective(env.mdp, d, SoftmaxLinearPolicy(2, k, lo).table(env.features))) /
                (2 * h);
      }
      EXPECT_LE((g - fd).norm() / std::max(fd.norm(), 1e-12), 1e-6) << env.name << " " << trial;
    }
  }
}

TEST(Gradient, BellmanIdentityForValueGradients) {
  // d v / d theta solves V = G + P V; check it against finite differences of v.
  const DiscreteEnv env = make_eleven_state();
  const int k = static_cast<int>(env.features.cols());
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 0.5);
  Eigen::VectorXd theta(2 * k);
  for (int i = 0; i < theta.size(); ++i) theta(i) = normal(rng);
  const SoftmaxLinearPolicy pi(2, k, theta);
  const PolicyTable table = pi.table(env.features);
  const Values vals = solve_values(env.mdp, table);
  const Eigen::MatrixXd g = state_gradients(policy_jacobians(pi, env.features), vals.q);
  const Eigen::MatrixXd dv = value_gradients(policy_kernel(env.mdp, table), g);
  const double h = 1e-5;
  for (int i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd hi = theta, lo = theta;
    hi(i) += h;
    lo(i) -= h;
    const Eigen::VectorXd fd =
        (oracle::values(env.mdp, SoftmaxLinearPolicy(2, k, hi).table(env.features)) -
         oracle::values(env.mdp, SoftmaxLinearPolicy(2, k, lo).table(env.features))) /
        (2 * h);
    EXPECT_LE((dv.col(i) - fd).cwiseAbs().maxCoeff(), 1e-8) << i;
  }
}

TEST(Stream, DeterministicForAFixedSeed) {
  const DiscreteEnv env = make_three_state();
  TabularStream a(env.mdp, env.behaviour, 99), b(env.mdp, env.behaviour, 99);
  for (int i = 0; i < 1000; ++i) {
    const DiscreteTransition x = a.next(), y = b.next();
    ASSERT_EQ(x.state, y.state);
    ASSERT_EQ(x.action, y.action);
    ASSERT_EQ(x.next_state, y.next_state);
    ASSERT_EQ(x.reward, y.reward);
  }
}

TEST(Stream, StateFrequenciesMatchStationaryDistribution) {
  for (const DiscreteEnv& env : {make_three_state(), make_eleven_state()}) {
    const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
    TabularStream stream(env.mdp, env.behaviour, 5);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(env.mdp.n_states);
    const int steps = 1000000;
    for (int i = 0; i < steps; ++i) counts(stream.next().state) += 1.0;
    EXPECT_LE((counts / steps - d).cwiseAbs().maxCoeff(), 0.005) << env.name;
  }
}

TEST(Stream, EpisodeBoundaries) {
  const DiscreteEnv env = make_three_state();
  TabularStream stream(env.mdp, env.behaviour, 1);
  DiscreteTransition prev = stream.next();
  EXPECT_TRUE(prev.episode_start);
  EXPECT_EQ(prev.state, 0);
  for (int i = 0; i < 1000; ++i) {
    const DiscreteTransition t = stream.next();
    EXPECT_EQ(t.episode_start, prev.next_state == env.mdp.terminal());
    if (prev.next_state == env.mdp.terminal()) {
      EXPECT_EQ(prev.gamma_next, 0.0);
    } else {
      EXPECT_EQ(t.state, prev.next_state);
    }
    prev = t;
  }
}

TEST(Validation, RejectsBadTensors) {
  DiscreteEnv env = make_three_state();
  EXPECT_TRUE(check_mdp(env.mdp).empty());
  TabularMdp bad = env.mdp;
  bad.trans(0, 1) += 0.1;
  EXPECT_THROW(validate_mdp(bad), ValidationError);
  bad = env.mdp;
  bad.discount(0, 1) = 1.5;
  EXPECT_THROW(validate_mdp(bad), ValidationError);
  bad = env.mdp;
  bad.interest(1) = -1.0;
  EXPECT_THROW(validate_mdp(bad), ValidationError);
  bad = env.mdp;
  bad.start(0) = 0.5;
  EXPECT_THROW(validate_mdp(bad), ValidationError);
  PolicyTable table = constant_table(3, 0.5);
  table(0, 0) = 0.7;
  EXPECT_THROW(validate_policy_table(table, 3, 2, "target"), ValidationError);
}
