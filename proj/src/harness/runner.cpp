#include "emphatic/harness/runner.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstring>

#include "emphatic/actors.hpp"
#include "emphatic/critics.hpp"
#include "emphatic/envs.hpp"
#include "emphatic/errors.hpp"

namespace emphatic::harness {

std::string theta_hash(const Eigen::VectorXd& theta) {
  std::uint64_t h = 14695981039346656037ull;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    unsigned char bytes[sizeof(double)];
    const double v = theta(i);
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Eigen::VectorXd initial_softmax_parameters(int n_actions, int n_features, InitKind init) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_actions) * n_features);
  if (init == InitKind::NearOptimal) {
    // pi(A0) = 0.9 wherever a state has a single unit feature
    const double pref = std::log(9.0 * (n_actions - 1));
    theta.head(n_features).setConstant(pref);
  }
  return theta;
}

namespace {

bool is_log_step(long long step, long long steps, long long interval) {
  return step == 0 || step == steps || step % interval == 0;
}

double mean_over(const Eigen::VectorXd& values, const std::vector<int>& states) {
  if (states.empty()) return values.mean();
  double acc = 0.0;
  for (int s : states) acc += values(s);
  return acc / static_cast<double>(states.size());
}

// Shared bookkeeping for one run: logging schedule and failure capture.
class Recorder {
 public:
  Recorder(RunRecord& record, long long steps, long long interval)
      : record_(record), steps_(steps), interval_(interval) {}

  template <typename Eval>
  void maybe_log(long long step, const Eigen::VectorXd& theta, Eval&& eval) {
    if (!is_log_step(step, steps_, interval_)) return;
    LogRow row;
    row.step = step;
    const auto [j, metric] = eval();
    row.J = j;
    row.aliased_metric = metric;
    row.theta_hash = theta_hash(theta);
    record_.series.push_back(std::move(row));
  }

 private:
  RunRecord& record_;
  long long steps_;
  long long interval_;
};

void run_discrete(const ExperimentConfig& config, const GridPoint& point, RunRecord& record,
                  long long& step) {
  const DiscreteEnv env = make_discrete_env(config.env);
  const TabularMdp& mdp = env.mdp;
  const Eigen::VectorXd d_mu = stationary_distribution(mdp, env.behaviour);
  const Eigen::VectorXd iw = weighted_interest(d_mu, mdp.interest);
  const long long steps = resolved_steps(config);
  const int n_features = static_cast<int>(env.features.cols());
  const bool exact_weights = config.actor == ActorKind::TrueAce;

  SoftmaxAce actor(SoftmaxLinearPolicy(mdp.n_actions, n_features,
                                       initial_softmax_parameters(mdp.n_actions, n_features,
                                                                  config.init)),
                   env.behaviour, env.features, mdp.interest, point.alpha, point.lambda_a);
  Recorder recorder(record, steps, config.log_interval);
  auto eval = [&] {
    const PolicyTable pi = actor.policy().table(env.features);
    return std::pair{objective(mdp, d_mu, pi), mean_over(pi.col(0), env.aliased_states)};
  };
  auto snapshot = [&] { record.theta = actor.policy().parameters(); };

  step = 0;
  snapshot();
  recorder.maybe_log(0, actor.policy().parameters(), eval);

  if (config.mode == UpdateMode::Expected) {
    const double lambda = exact_weights ? 1.0 : point.lambda_a;
    for (step = 1; step <= steps; ++step) {
      const Eigen::VectorXd g =
          true_gradient(mdp, d_mu, actor.policy(), env.features, lambda);
      actor.apply(point.alpha * g);
      snapshot();
      recorder.maybe_log(step, actor.policy().parameters(), eval);
    }
    return;
  }

  TabularStream stream(mdp, env.behaviour, record.seed);
  TabularOracleCritic oracle(mdp);
  Eigen::VectorXd m;
  auto refresh = [&] {
    const PolicyTable pi = actor.policy().table(env.features);
    oracle.refresh(pi);
    if (exact_weights) m = emphatic_weights(policy_kernel(mdp, pi), iw, 1.0);
  };
  refresh();
  const bool gtd = config.critic == CriticKind::Gtd;
  GtdCritic critic(one_hot_features(mdp.n_states),
                   GtdParams{point.alpha_v, point.alpha_w, point.lambda_c});

  for (step = 1; step <= steps; ++step) {
    const DiscreteTransition t = stream.next();
    Eigen::VectorXd inc;
    if (config.all_actions) {
      inc = actor.step_all_actions(t, oracle.values().q.row(t.state).transpose(),
                                   oracle.value(t.state));
    } else {
      double delta;
      if (gtd)
        delta = critic.update(t, actor.rho(t));
      else
        delta = oracle.td_error(t);
      if (exact_weights)
        inc = actor.true_step(t, delta, exact_emphasis(m, d_mu, t.state));
      else
        inc = actor.step(t, delta);
    }
    if (!gtd && !inc.isZero(0.0)) refresh();
    if (gtd && exact_weights && !inc.isZero(0.0)) refresh();
    snapshot();
    recorder.maybe_log(step, actor.policy().parameters(), eval);
  }
}

void run_continuous_deterministic(const ExperimentConfig& config, const GridPoint& point,
                                  RunRecord& record, long long& step) {
  const ContinuousEnv env = make_continuous();
  const ContinuousActionMdp& mdp = env.mdp;
  const Eigen::VectorXd d_mu = stationary_distribution(mdp, env.behaviour);
  const long long steps = resolved_steps(config);
  const bool emphatic = config.actor == ActorKind::TrueDpge;

  DpgActor actor(DeterministicLinearPolicy(static_cast<int>(env.features.cols())), env.features,
                 point.alpha, emphatic ? DpgWeighting::ExactEmphasis : DpgWeighting::Unit);
  Recorder recorder(record, steps, config.log_interval);
  auto eval = [&] {
    const Eigen::VectorXd actions = actor.policy().actions(env.features);
    return std::pair{deterministic_objective(mdp, d_mu, actions),
                     mean_over(actions, env.aliased_states)};
  };
  auto snapshot = [&] { record.theta = actor.policy().parameters(); };

  step = 0;
  snapshot();
  recorder.maybe_log(0, actor.policy().parameters(), eval);

  if (config.mode == UpdateMode::Expected) {
    for (step = 1; step <= steps; ++step) {
      const DeterministicSolution sol = solve_deterministic(mdp, d_mu, actor.policy(), env.features);
      const Eigen::VectorXd g = emphatic ? sol.grad : sol.semi_grad;
      actor.apply(point.alpha * g);
      snapshot();
      recorder.maybe_log(step, actor.policy().parameters(), eval);
    }
    return;
  }

  ContinuousStream stream(mdp, env.behaviour, record.seed);
  ContinuousOracleCritic oracle(mdp);
  Eigen::VectorXd m;
  auto refresh = [&] {
    const Eigen::VectorXd actions = actor.policy().actions(env.features);
    oracle.refresh_deterministic(actions);
    if (emphatic) m = deterministic_emphatic_weights(mdp, d_mu, actions);
  };
  refresh();
  for (step = 1; step <= steps; ++step) {
    const ContinuousTransition t = stream.next();
    const double a = actor.action(t.state);
    const double dq = oracle.action_value_da(t.state, a);
    const double w = emphatic ? exact_emphasis(m, d_mu, t.state) : 1.0;
    const Eigen::VectorXd inc = actor.step(t, dq, w);
    if (!inc.isZero(0.0)) refresh();
    snapshot();
    recorder.maybe_log(step, actor.policy().parameters(), eval);
  }
}

void run_continuous_gaussian(const ExperimentConfig& config, const GridPoint& point,
                             RunRecord& record, long long& step) {
  const ContinuousEnv env = make_continuous();
  const ContinuousActionMdp& mdp = env.mdp;
  const Eigen::VectorXd d_mu = stationary_distribution(mdp, env.behaviour);
  const long long steps = resolved_steps(config);
  const int k = static_cast<int>(env.features.cols());
  const bool exact_weights = config.actor == ActorKind::TrueAce;

  GaussianAce actor(GaussianLinearPolicy(k), env.behaviour, env.features, mdp.interest,
                    point.alpha, point.lambda_a);
  Recorder recorder(record, steps, config.log_interval);
  auto means = [&] {
    Eigen::VectorXd out(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) out(s) = actor.policy().mean(actor.feature(s));
    return out;
  };
  auto stddevs = [&] {
    Eigen::VectorXd out(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) out(s) = actor.policy().stddev(actor.feature(s));
    return out;
  };
  auto eval = [&] {
    return std::pair{gaussian_objective(mdp, d_mu, actor.policy(), env.features),
                     mean_over(means(), env.aliased_states)};
  };
  auto snapshot = [&] { record.theta = actor.policy().parameters(); };

  step = 0;
  snapshot();
  recorder.maybe_log(0, actor.policy().parameters(), eval);

  if (config.mode == UpdateMode::Expected) {
    const double lambda = exact_weights ? 1.0 : point.lambda_a;
    for (step = 1; step <= steps; ++step) {
      const GaussianSolution sol = solve_gaussian(mdp, d_mu, actor.policy(), env.features, lambda);
      actor.apply(point.alpha * sol.grad_lambda);
      snapshot();
      recorder.maybe_log(step, actor.policy().parameters(), eval);
    }
    return;
  }

  ContinuousStream stream(mdp, env.behaviour, record.seed);
  ContinuousOracleCritic oracle(mdp);
  Eigen::VectorXd m;
  auto refresh = [&] {
    oracle.refresh_gaussian(means(), stddevs());
    if (exact_weights) m = solve_gaussian(mdp, d_mu, actor.policy(), env.features, 1.0).m;
  };
  refresh();
  for (step = 1; step <= steps; ++step) {
    const ContinuousTransition t = stream.next();
    const double delta = oracle.td_error(t);
    const Eigen::VectorXd inc = exact_weights
                                    ? actor.true_step(t, delta, exact_emphasis(m, d_mu, t.state))
                                    : actor.step(t, delta);
    if (!inc.isZero(0.0)) refresh();
    snapshot();
    recorder.maybe_log(step, actor.policy().parameters(), eval);
  }
}

}  // namespace

RunRecord execute_run(const ExperimentConfig& config, const GridPoint& point, int run_index) {
  RunRecord record;
  record.config_hash = config_hash(config);
  record.point = point;
  record.run_index = run_index;
  record.global_index = point.index * config.runs + run_index;
  record.seed = config.base_seed + static_cast<std::uint64_t>(run_index);
  long long step = 0;
  try {
    if (!is_continuous_env(config.env))
      run_discrete(config, point, record, step);
    else if (config.actor == ActorKind::Dpg || config.actor == ActorKind::TrueDpge)
      run_continuous_deterministic(config, point, record, step);
    else
      run_continuous_gaussian(config, point, record, step);
  } catch (const std::exception& e) {
    record.failure = e.what();
    record.failed_step = step;
  }
  return record;
}

namespace {

struct Task {
  GridPoint point;
  int run = 0;
};

std::vector<Task> tasks_for(const ExperimentConfig& config) {
  std::vector<Task> tasks;
  for (const GridPoint& p : expand_grid(config))
    for (int r = 0; r < config.runs; ++r) tasks.push_back({p, r});
  return tasks;
}

}  // namespace

std::vector<RunRecord> run_serial(const ExperimentConfig& config) {
  validate_config(config);
  const std::vector<Task> tasks = tasks_for(config);
  std::vector<RunRecord> records(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i)
    records[i] = execute_run(config, tasks[i].point, tasks[i].run);
  return records;
}

std::vector<RunRecord> run_parallel(const ExperimentConfig& config, int threads) {
  validate_config(config);
  const std::vector<Task> tasks = tasks_for(config);
  std::vector<RunRecord> records(tasks.size());
  const int n = static_cast<int>(tasks.size());
  const int workers = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    records[idx] = execute_run(config, tasks[idx].point, tasks[idx].run);
  }
  return records;
}

}  // namespace emphatic::harness
