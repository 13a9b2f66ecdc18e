#include "emphatic/mdp.hpp"

#include <cmath>
#include <sstream>

#include "emphatic/errors.hpp"

namespace emphatic {

TabularMdp::TabularMdp(int states, int actions)
    : n_states(states),
      n_actions(actions),
      trans(Eigen::MatrixXd::Zero(states * actions, states + 1)),
      reward(Eigen::MatrixXd::Zero(states * actions, states + 1)),
      discount(Eigen::MatrixXd::Zero(states * actions, states + 1)),
      start(Eigen::VectorXd::Zero(states)),
      interest(Eigen::VectorXd::Ones(states)) {}

namespace {

constexpr double kRowTolerance = 1e-12;
constexpr double kMinRcond = 1e-12;

std::string pair_name(int s, int a) {
  std::ostringstream os;
  os << "(s=" << s << ", a=" << a << ")";
  return os.str();
}

}  // namespace

std::vector<std::string> check_mdp(const TabularMdp& mdp) {
  std::vector<std::string> problems;
  const int n = mdp.n_states;
  const int na = mdp.n_actions;
  if (n <= 0 || na <= 0) {
    problems.emplace_back("mdp needs at least one state and one action");
    return problems;
  }
  const auto rows = static_cast<Eigen::Index>(n) * na;
  auto check_shape = [&](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != rows || m.cols() != n + 1) {
      problems.emplace_back(std::string(name) + " tensor has wrong shape");
      return false;
    }
    return true;
  };
  const bool shapes = check_shape(mdp.trans, "transition") &
                      check_shape(mdp.reward, "reward") &
                      check_shape(mdp.discount, "discount");
  if (mdp.start.size() != n) problems.emplace_back("start distribution has wrong length");
  if (mdp.interest.size() != n) problems.emplace_back("interest vector has wrong length");
  if (!shapes || !problems.empty()) return problems;

  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < na; ++a) {
      const auto row = mdp.trans.row(mdp.row(s, a));
      if ((row.array() < 0.0).any())
        problems.push_back("negative transition probability at " + pair_name(s, a));
      const double sum = row.sum();
      if (std::abs(sum - 1.0) > kRowTolerance) {
        std::ostringstream os;
        os << "transition row " << pair_name(s, a) << " sums to " << sum;
        problems.push_back(os.str());
      }
      const auto g = mdp.discount.row(mdp.row(s, a));
      if ((g.array() < 0.0).any() || (g.array() > 1.0).any())
        problems.push_back("discount outside [0,1] at " + pair_name(s, a));
      if (!mdp.reward.row(mdp.row(s, a)).allFinite())
        problems.push_back("non-finite reward at " + pair_name(s, a));
    }
  }
  if ((mdp.start.array() < 0.0).any() || std::abs(mdp.start.sum() - 1.0) > kRowTolerance)
    problems.emplace_back("start distribution is not a probability vector");
  if ((mdp.interest.array() < 0.0).any()) problems.emplace_back("interest has negative entries");
  return problems;
}

void validate_mdp(const TabularMdp& mdp) {
  const auto problems = check_mdp(mdp);
  if (problems.empty()) return;
  std::ostringstream os;
  os << "invalid mdp: " << problems.front();
  if (problems.size() > 1) os << " (+" << problems.size() - 1 << " more)";
  throw ValidationError(os.str());
}

void validate_policy_table(const PolicyTable& table, int n_states, int n_actions,
                           const std::string& what) {
  if (table.rows() != n_states || table.cols() != n_actions)
    throw ValidationError(what + " table has wrong shape");
  for (int s = 0; s < n_states; ++s) {
    if ((table.row(s).array() < 0.0).any() ||
        std::abs(table.row(s).sum() - 1.0) > kRowTolerance)
      throw ValidationError(what + " row " + std::to_string(s) + " is not a distribution");
  }
}

// ---------------------------------------------------------------------------

int sample_start_state(const Eigen::VectorXd& start, std::mt19937_64& rng) {
  return sample_categorical(start, rng);
}

TabularStream::TabularStream(const TabularMdp& mdp, PolicyTable behaviour, std::uint64_t seed)
    : mdp_(&mdp), behaviour_(std::move(behaviour)), rng_(seed) {
  state_ = sample_start_state(mdp_->start, rng_);
}

DiscreteTransition TabularStream::next() {
  DiscreteTransition t;
  t.state = state_;
  t.episode_start = episode_start_;
  t.action = sample_categorical(behaviour_.row(state_).transpose(), rng_);
  const Eigen::Index row = mdp_->row(state_, t.action);
  t.next_state = sample_categorical(mdp_->trans.row(row).transpose(), rng_);
  t.reward = mdp_->reward(row, t.next_state);
  t.gamma_next = mdp_->discount(row, t.next_state);
  if (t.next_state == mdp_->terminal()) {
    t.gamma_next = 0.0;
    state_ = sample_start_state(mdp_->start, rng_);
    episode_start_ = true;
  } else {
    state_ = t.next_state;
    episode_start_ = false;
  }
  return t;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd solve_dense(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond >= kMinRcond)) {
    std::ostringstream os;
    os << what << ": system is singular (rcond " << rcond << ")";
    throw SingularSystem(os.str());
  }
  return lu.solve(b);
}

Eigen::MatrixXd restart_chain(const TabularMdp& mdp, const PolicyTable& mu) {
  const int n = mdp.n_states;
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = mu(s, a);
      if (w == 0.0) continue;
      const auto row = mdp.trans.row(mdp.row(s, a));
      chain.row(s) += w * row.head(n);
      chain.row(s) += w * row(n) * mdp.start.transpose();
    }
  }
  return chain;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& chain) {
  const Eigen::Index n = chain.rows();
  // d^T (I - P) = 0 with one balance equation swapped for sum(d) = 1.
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - chain.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd d;
  try {
    d = solve_dense(a, b, "stationary distribution");
  } catch (const SingularSystem& e) {
    throw NonConvergent(std::string(e.what()) + "; behaviour chain is not irreducible");
  }
  const double residual = (d.transpose() * chain - d.transpose()).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10)) {
    std::ostringstream os;
    os << "stationary distribution residual " << residual << " exceeds 1e-10";
    throw NonConvergent(os.str());
  }
  return d / d.sum();
}

Eigen::VectorXd stationary_distribution(const TabularMdp& mdp, const PolicyTable& mu) {
  return stationary_distribution(restart_chain(mdp, mu));
}

Eigen::MatrixXd policy_kernel(const TabularMdp& mdp, const PolicyTable& pi) {
  const int n = mdp.n_states;
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const Eigen::Index row = mdp.row(s, a);
      kernel.row(s) += pi(s, a) * mdp.trans.row(row).head(n).cwiseProduct(
                                      mdp.discount.row(row).head(n));
    }
  }
  return kernel;
}

Eigen::VectorXd expected_reward(const TabularMdp& mdp, const PolicyTable& pi) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const Eigen::Index row = mdp.row(s, a);
      r(s) += pi(s, a) * mdp.trans.row(row).dot(mdp.reward.row(row));
    }
  }
  return r;
}

Values solve_values(const TabularMdp& mdp, const PolicyTable& pi) {
  const int n = mdp.n_states;
  const Eigen::MatrixXd kernel = policy_kernel(mdp, pi);
  Values out;
  out.v = solve_dense(Eigen::MatrixXd::Identity(n, n) - kernel, expected_reward(mdp, pi),
                      "value solve");
  Eigen::VectorXd v_ext(n + 1);
  v_ext.head(n) = out.v;
  v_ext(n) = 0.0;
  out.q.resize(n, mdp.n_actions);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const Eigen::Index row = mdp.row(s, a);
      const Eigen::ArrayXd target =
          mdp.reward.row(row).transpose().array() +
          mdp.discount.row(row).transpose().array() * v_ext.array();
      out.q(s, a) = (mdp.trans.row(row).transpose().array() * target).sum();
    }
  }
  return out;
}

Eigen::VectorXd weighted_interest(const Eigen::VectorXd& d_mu, const Eigen::VectorXd& interest) {
  return d_mu.cwiseProduct(interest);
}

Eigen::VectorXd emphatic_weights(const Eigen::MatrixXd& kernel,
                                 const Eigen::VectorXd& weighted_interest, double lambda_a) {
  if (lambda_a < 0.0 || lambda_a > 1.0)
    throw ValidationError("lambda_a must lie in [0, 1]");
  const Eigen::Index n = kernel.rows();
  const Eigen::VectorXd m = solve_dense(Eigen::MatrixXd::Identity(n, n) - kernel.transpose(),
                                        weighted_interest, "emphatic weighting solve");
  // i^T (I-P)^{-1} (I - (1-l) P) = l m^T + (1-l) i^T, since m^T P = m^T - i^T.
  if (lambda_a == 1.0) return m;
  if (lambda_a == 0.0) return weighted_interest;
  return lambda_a * m + (1.0 - lambda_a) * weighted_interest;
}

Eigen::VectorXd emphatic_weights(const TabularMdp& mdp, const Eigen::VectorXd& d_mu,
                                 const PolicyTable& pi, double lambda_a) {
  return emphatic_weights(policy_kernel(mdp, pi), weighted_interest(d_mu, mdp.interest),
                          lambda_a);
}

double objective(const TabularMdp& mdp, const Eigen::VectorXd& d_mu, const PolicyTable& pi) {
  return weighted_interest(d_mu, mdp.interest).dot(solve_values(mdp, pi).v);
}

Eigen::MatrixXd state_gradients(const std::vector<Eigen::MatrixXd>& jacobians,
                                const Eigen::MatrixXd& q) {
  const auto n = static_cast<Eigen::Index>(jacobians.size());
  const Eigen::Index dim = n > 0 ? jacobians.front().cols() : 0;
  Eigen::MatrixXd g(n, dim);
  for (Eigen::Index s = 0; s < n; ++s) g.row(s) = q.row(s) * jacobians[s];
  return g;
}

Eigen::MatrixXd value_gradients(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& g) {
  const Eigen::Index n = kernel.rows();
  return solve_dense(Eigen::MatrixXd::Identity(n, n) - kernel, g, "value gradient solve");
}

Eigen::VectorXd true_gradient(const TabularMdp& mdp, const Eigen::VectorXd& d_mu,
                              const PolicyTable& pi,
                              const std::vector<Eigen::MatrixXd>& jacobians, double lambda_a) {
  const Values values = solve_values(mdp, pi);
  const Eigen::VectorXd m = emphatic_weights(mdp, d_mu, pi, lambda_a);
  return state_gradients(jacobians, values.q).transpose() * m;
}

std::vector<Eigen::MatrixXd> policy_jacobians(const SoftmaxLinearPolicy& policy,
                                              const FeatureMap& features) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index s = 0; s < features.rows(); ++s)
    out.push_back(policy.prob_jacobian(features.row(s).transpose()));
  return out;
}

Eigen::VectorXd true_gradient(const TabularMdp& mdp, const Eigen::VectorXd& d_mu,
                              const SoftmaxLinearPolicy& policy, const FeatureMap& features,
                              double lambda_a) {
  return true_gradient(mdp, d_mu, policy.table(features), policy_jacobians(policy, features),
                       lambda_a);
}

ExactSolution solve_exact(const TabularMdp& mdp, const Eigen::VectorXd& d_mu,
                          const SoftmaxLinearPolicy& policy, const FeatureMap& features,
                          double lambda_a) {
  ExactSolution out;
  const PolicyTable pi = policy.table(features);
  out.d_mu = d_mu;
  const Values values = solve_values(mdp, pi);
  out.v = values.v;
  out.q = values.q;
  out.kernel = policy_kernel(mdp, pi);
  const Eigen::VectorXd iw = weighted_interest(d_mu, mdp.interest);
  out.m = emphatic_weights(out.kernel, iw, 1.0);
  out.m_lambda = emphatic_weights(out.kernel, iw, lambda_a);
  out.J = iw.dot(out.v);
  const Eigen::MatrixXd g = state_gradients(policy_jacobians(policy, features), out.q);
  out.grad = g.transpose() * out.m;
  out.semi_grad = g.transpose() * iw;
  out.grad_lambda = g.transpose() * out.m_lambda;
  return out;
}

double fixed_point_residual(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& weighted_interest,
                            const Eigen::VectorXd& m) {
  const Eigen::VectorXd r = m - weighted_interest - kernel.transpose() * m;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace emphatic
