#include "emphatic/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "emphatic/critics.hpp"

namespace emphatic {

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

// Sufficient statistics of the ratio estimator sum X / sum L.
struct RatioSums {
  Eigen::VectorXd x, xx, xl;
  double l = 0.0, ll = 0.0;
  long long episodes = 0;

  explicit RatioSums(Eigen::Index dim = 0)
      : x(Eigen::VectorXd::Zero(dim)), xx(Eigen::VectorXd::Zero(dim)), xl(Eigen::VectorXd::Zero(dim)) {}

  void add_episode(const Eigen::VectorXd& episode_sum, double length) {
    x += episode_sum;
    xx += episode_sum.cwiseProduct(episode_sum);
    xl += length * episode_sum;
    l += length;
    ll += length * length;
    ++episodes;
  }
  void merge(const RatioSums& o) {
    x += o.x;
    xx += o.xx;
    xl += o.xl;
    l += o.l;
    ll += o.ll;
    episodes += o.episodes;
  }
  McGradient finish() const {
    McGradient out;
    out.episodes = episodes;
    out.steps = static_cast<long long>(l);
    out.mean = x / l;
    const double n = static_cast<double>(episodes);
    const Eigen::VectorXd& r = out.mean;
    // sum_e (X_e - r L_e)^2
    Eigen::VectorXd resid = xx - 2.0 * r.cwiseProduct(xl) + r.cwiseProduct(r) * ll;
    resid = resid.cwiseMax(0.0);
    const double mean_len = l / n;
    out.se = (resid / (n * (n - 1.0))).cwiseSqrt() / mean_len;
    return out;
  }
};

template <typename Result, typename ChunkFn, typename Merge>
Result run_chunks(long long episodes, int chunk_episodes, Execution exec, Result init,
                  ChunkFn&& chunk, Merge&& merge) {
  const long long n_chunks = (episodes + chunk_episodes - 1) / chunk_episodes;
  std::vector<Result> parts(static_cast<std::size_t>(n_chunks), init);
  auto body = [&](long long c) {
    const long long begin = c * chunk_episodes;
    const long long count = std::min<long long>(chunk_episodes, episodes - begin);
    parts[static_cast<std::size_t>(c)] = chunk(static_cast<std::uint64_t>(c), count);
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < n_chunks; ++c) body(c);
  } else {
    for (long long c = 0; c < n_chunks; ++c) body(c);
  }
  Result total = init;
  for (const Result& p : parts) merge(total, p);
  return total;
}

}  // namespace

McGradient mc_ace_gradient(const DiscreteEnv& env, const SoftmaxLinearPolicy& policy,
                           double lambda_a, long long episodes, std::uint64_t seed, Execution exec,
                           int chunk_episodes) {
  TabularOracleCritic oracle(env.mdp);
  oracle.refresh(policy.table(env.features));
  const int terminal = env.mdp.terminal();
  auto chunk = [&](std::uint64_t index, long long count) {
    RatioSums sums(policy.dim());
    TabularStream stream(env.mdp, env.behaviour, chunk_seed(seed, index));
    SoftmaxAce actor(policy, env.behaviour, env.features, env.mdp.interest, 1.0, lambda_a);
    Eigen::VectorXd episode_sum = Eigen::VectorXd::Zero(policy.dim());
    for (long long e = 0; e < count; ++e) {
      episode_sum.setZero();
      double length = 0.0;
      while (true) {
        const DiscreteTransition t = stream.next();
        episode_sum += actor.propose(t, oracle.td_error(t));
        length += 1.0;
        if (t.next_state == terminal) break;
      }
      sums.add_episode(episode_sum, length);
    }
    return sums;
  };
  const RatioSums total = run_chunks(episodes, chunk_episodes, exec, RatioSums(policy.dim()), chunk,
                                     [](RatioSums& a, const RatioSums& b) { a.merge(b); });
  return total.finish();
}

McEmphasis mc_emphasis(const DiscreteEnv& env, const SoftmaxLinearPolicy& policy, double lambda_a,
                       long long episodes, std::uint64_t seed, Execution exec, int chunk_episodes) {
  const int n = env.mdp.n_states;
  const int terminal = env.mdp.terminal();
  struct Sums {
    Eigen::VectorXd m, visits;
  };
  const Sums zero{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  auto chunk = [&](std::uint64_t index, long long count) {
    Sums sums = zero;
    TabularStream stream(env.mdp, env.behaviour, chunk_seed(seed, index));
    SoftmaxAce actor(policy, env.behaviour, env.features, env.mdp.interest, 1.0, lambda_a);
    for (long long e = 0; e < count; ++e) {
      while (true) {
        const DiscreteTransition t = stream.next();
        sums.m(t.state) += actor.advance_trace(t);
        sums.visits(t.state) += 1.0;
        if (t.next_state == terminal) break;
      }
    }
    return sums;
  };
  const Sums total = run_chunks(episodes, chunk_episodes, exec, zero, chunk, [](Sums& a, const Sums& b) {
    a.m += b.m;
    a.visits += b.visits;
  });
  const Eigen::VectorXd d_mu = stationary_distribution(env.mdp, env.behaviour);
  McEmphasis out;
  out.visits = total.visits;
  out.steps = static_cast<long long>(total.visits.sum());
  out.weighted = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n; ++s)
    if (total.visits(s) > 0) out.weighted(s) = d_mu(s) * total.m(s) / total.visits(s);
  return out;
}

McGradient mc_dpg_gradient(const ContinuousEnv& env, const DeterministicLinearPolicy& policy,
                           DpgWeighting weighting, long long episodes, std::uint64_t seed,
                           Execution exec, int chunk_episodes) {
  const Eigen::VectorXd d_mu = stationary_distribution(env.mdp, env.behaviour);
  const Eigen::VectorXd actions = policy.actions(env.features);
  ContinuousOracleCritic oracle(env.mdp);
  oracle.refresh_deterministic(actions);
  const Eigen::VectorXd m = deterministic_emphatic_weights(env.mdp, d_mu, actions);
  const int terminal = env.mdp.terminal();
  auto chunk = [&](std::uint64_t index, long long count) {
    RatioSums sums(policy.dim());
    ContinuousStream stream(env.mdp, env.behaviour, chunk_seed(seed, index));
    DpgActor actor(policy, env.features, 1.0, weighting);
    Eigen::VectorXd episode_sum = Eigen::VectorXd::Zero(policy.dim());
    for (long long e = 0; e < count; ++e) {
      episode_sum.setZero();
      double length = 0.0;
      while (true) {
        const ContinuousTransition t = stream.next();
        const double w =
            weighting == DpgWeighting::ExactEmphasis ? exact_emphasis(m, d_mu, t.state) : 1.0;
        episode_sum += actor.propose(t, oracle.action_value_da(t.state, actions(t.state)), w);
        length += 1.0;
        if (t.next_state == terminal) break;
      }
      sums.add_episode(episode_sum, length);
    }
    return sums;
  };
  const RatioSums total = run_chunks(episodes, chunk_episodes, exec, RatioSums(policy.dim()), chunk,
                                     [](RatioSums& a, const RatioSums& b) { a.merge(b); });
  return total.finish();
}

}  // namespace emphatic
