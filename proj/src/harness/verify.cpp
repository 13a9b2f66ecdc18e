#include "emphatic/harness/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "emphatic/critics.hpp"
#include "emphatic/envs.hpp"
#include "emphatic/errors.hpp"
#include "emphatic/harness/runner.hpp"

namespace emphatic::harness {

namespace {

constexpr double kFdStep = 1e-5;

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

CheckResult make(const std::string& name, double error, double tolerance, std::string detail = {}) {
  CheckResult r;
  r.name = name;
  r.error = error;
  r.tolerance = tolerance;
  r.pass = std::isfinite(error) && error <= tolerance;
  r.detail = std::move(detail);
  return r;
}

CheckResult skipped(const std::string& name, std::string why) {
  CheckResult r;
  r.name = name;
  r.skipped = true;
  r.pass = true;
  r.detail = std::move(why);
  return r;
}

Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x, lo = x;
    hi(i) += kFdStep;
    lo(i) -= kFdStep;
    g(i) = (f(hi) - f(lo)) / (2.0 * kFdStep);
  }
  return g;
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& reference) {
  return (a - reference).norm() / std::max(reference.norm(), 1e-12);
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// Largest |estimate - truth| in standard errors. Differences at rounding
// level count as agreement whatever the standard error.
double max_z(const McGradient& mc, const Eigen::VectorXd& truth) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const double diff = std::abs(mc.mean(i) - truth(i));
    if (diff <= 1e-12) continue;
    if (mc.se(i) > 0.0)
      worst = std::max(worst, diff / mc.se(i));
    else
      worst = std::numeric_limits<double>::infinity();
  }
  return worst;
}

using CheckFn = std::function<CheckResult()>;

// ---------------------------------------------------------------------------
// tabular envs

std::vector<std::pair<std::string, CheckFn>> tabular_checks(const DiscreteEnv& env,
                                                            const VerifyOptions& opt,
                                                            bool& invalid) {
  std::vector<std::pair<std::string, CheckFn>> checks;
  const TabularMdp& mdp = env.mdp;
  std::vector<std::string> problems = check_mdp(mdp);
  try {
    validate_policy_table(env.behaviour, mdp.n_states, mdp.n_actions, "behaviour");
  } catch (const ValidationError& e) {
    problems.push_back(e.what());
  }
  if (env.features.rows() != mdp.n_states) problems.push_back("feature map needs one row per state");
  invalid = !problems.empty();
  checks.emplace_back("validation", [problems] {
    std::string detail = problems.empty() ? "all tensors valid" : problems.front();
    if (problems.size() > 1) detail += " (+" + std::to_string(problems.size() - 1) + " more)";
    return make("validation", static_cast<double>(problems.size()), 0.0, detail);
  });
  if (invalid) return checks;

  const int n_features = static_cast<int>(env.features.cols());
  auto thetas = [&opt, &mdp, n_features] {
    std::mt19937_64 rng(opt.seed);
    std::vector<SoftmaxLinearPolicy> out;
    for (int k = 0; k < opt.random_thetas; ++k)
      out.emplace_back(mdp.n_actions, n_features,
                       random_vector(static_cast<Eigen::Index>(mdp.n_actions) * n_features, rng, 1.0));
    return out;
  };

  checks.emplace_back("stationary", [&env, &mdp] {
    const Eigen::MatrixXd chain = restart_chain(mdp, env.behaviour);
    const Eigen::VectorXd d = stationary_distribution(chain);
    const double residual = (d.transpose() * chain - d.transpose()).cwiseAbs().maxCoeff();
    const double err = std::max(residual, std::abs(d.sum() - 1.0));
    return make("stationary", err, 1e-10, fmt("||d'P - d'||_inf = %.3g, min d = %.3g", residual, d.minCoeff()));
  });
  checks.emplace_back("fixed-point", [&env, &mdp, thetas] {
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const Eigen::VectorXd iw = weighted_interest(d, mdp.interest);
    double worst = 0.0, min_m = 0.0;
    for (const auto& pi : thetas()) {
      const Eigen::MatrixXd kernel = policy_kernel(mdp, pi.table(env.features));
      const Eigen::VectorXd m = emphatic_weights(kernel, iw, 1.0);
      worst = std::max(worst, fixed_point_residual(kernel, iw, m));
      min_m = std::min(min_m, m.minCoeff());
    }
    const double err = min_m < -1e-12 ? std::numeric_limits<double>::infinity() : worst;
    return make("fixed-point", err, 1e-10, fmt("max residual %.3g, min m %.3g", worst, min_m));
  });
  checks.emplace_back("bellman-gradient", [&env, &mdp, thetas] {
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const Eigen::VectorXd iw = weighted_interest(d, mdp.interest);
    double worst = 0.0, worst_sum = 0.0;
    for (const auto& pi : thetas()) {
      const PolicyTable table = pi.table(env.features);
      const Eigen::MatrixXd kernel = policy_kernel(mdp, table);
      const Eigen::MatrixXd g = state_gradients(policy_jacobians(pi, env.features), solve_values(mdp, table).q);
      const Eigen::MatrixXd vdot = value_gradients(kernel, g);
      worst = std::max(worst, (vdot - g - kernel * vdot).cwiseAbs().maxCoeff());
      const Eigen::VectorXd via_values = vdot.transpose() * iw;
      worst_sum = std::max(worst_sum,
                           (via_values - true_gradient(mdp, d, pi, env.features, 1.0)).cwiseAbs().maxCoeff());
    }
    return make("bellman-gradient", std::max(worst, worst_sum), 1e-10,
                fmt("||Vdot - G - P Vdot||_inf = %.3g, |i'Vdot - grad| = %.3g", worst, worst_sum));
  });
  checks.emplace_back("gradient-fd", [&env, &mdp, thetas, n_features] {
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    double worst = 0.0;
    for (const auto& pi : thetas()) {
      const Eigen::VectorXd g = true_gradient(mdp, d, pi, env.features, 1.0);
      const Eigen::VectorXd fd = central_difference(
          [&](const Eigen::VectorXd& th) {
            return objective(mdp, d, SoftmaxLinearPolicy(mdp.n_actions, n_features, th).table(env.features));
          },
          pi.parameters());
      worst = std::max(worst, relative_error(g, fd));
    }
    return make("gradient-fd", worst, 1e-6, "max relative L2 error over random theta, h = 1e-5");
  });
  checks.emplace_back("endpoint", [&env, &mdp, thetas] {
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const Eigen::VectorXd iw = weighted_interest(d, mdp.interest);
    double exact = 0.0, affine = 0.0;
    for (const auto& pi : thetas()) {
      const Eigen::MatrixXd kernel = policy_kernel(mdp, pi.table(env.features));
      const Eigen::VectorXd m0 = emphatic_weights(kernel, iw, 0.0);
      const Eigen::VectorXd m1 = emphatic_weights(kernel, iw, 1.0);
      const Eigen::VectorXd mh = emphatic_weights(kernel, iw, 0.5);
      exact = std::max(exact, (m0 - iw).cwiseAbs().maxCoeff());
      affine = std::max(affine, (mh - 0.5 * (m0 + m1)).cwiseAbs().maxCoeff());
    }
    // lambda = 0 must reproduce d_mu * i exactly
    const double err = exact > 0.0 ? std::numeric_limits<double>::infinity() : affine;
    return make("endpoint", err, 1e-12, fmt("|m_0 - d i|_inf = %.3g, affine defect %.3g", exact, affine));
  });
  checks.emplace_back("unbiasedness", [&env, &mdp, &opt, n_features] {
    const SoftmaxLinearPolicy pi(mdp.n_actions, n_features,
                                 initial_softmax_parameters(mdp.n_actions, n_features, InitKind::NearOptimal));
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const Eigen::VectorXd g = true_gradient(mdp, d, pi, env.features, 1.0);
    const McGradient mc = mc_ace_gradient(env, pi, 1.0, opt.mc_episodes, opt.seed, opt.exec);
    return make("unbiasedness", max_z(mc, g), 3.0,
                "max |MC mean - true gradient| in standard errors over " + std::to_string(mc.episodes) +
                    " episodes");
  });
  checks.emplace_back("weighting", [&env, &mdp, &opt, n_features] {
    const SoftmaxLinearPolicy pi(mdp.n_actions, n_features,
                                 initial_softmax_parameters(mdp.n_actions, n_features, InitKind::NearOptimal));
    const PolicyTable table = pi.table(env.features);
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const Eigen::VectorXd m = emphatic_weights(policy_kernel(mdp, table), weighted_interest(d, mdp.interest), 1.0);
    // episodes per step: termination mass under the behaviour stationary distribution
    double end_rate = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) end_rate += d(s) * env.behaviour(s, a) * mdp.p(s, a, mdp.terminal());
    const auto episodes = static_cast<long long>(std::ceil(static_cast<double>(opt.weighting_steps) * end_rate));
    const McEmphasis mc = mc_emphasis(env, pi, 1.0, std::max(episodes, 1LL), opt.seed + 1, opt.exec);
    return make("weighting", (mc.weighted - m).cwiseAbs().maxCoeff(), 0.01,
                "||d E[M|s] - m||_inf over " + std::to_string(mc.steps) + " steps");
  });
  checks.emplace_back("sum-grad-zero", [&env, &mdp, thetas] {
    double worst = 0.0;
    for (const auto& pi : thetas())
      for (int s = 0; s < mdp.n_states; ++s)
        worst = std::max(worst, pi.prob_jacobian(env.features.row(s).transpose()).colwise().sum().cwiseAbs().maxCoeff());
    return make("sum-grad-zero", worst, 1e-12, "max |sum_a d pi(a|s) / d theta|");
  });
  return checks;
}

// ---------------------------------------------------------------------------
// continuous env

std::vector<std::string> check_continuous(const ContinuousEnv& env) {
  std::vector<std::string> problems;
  const ContinuousActionMdp& mdp = env.mdp;
  const int n = mdp.n_states;
  for (double a : {-50.0, -5.0, -1.0, 0.0, 0.5, 1.0, 5.0, 50.0})
    for (int s = 0; s < n; ++s) {
      double total = 0.0;
      for (int next = 0; next <= n; ++next) {
        const double p = mdp.trans(s, a, next);
        if (!(p >= 0.0 && p <= 1.0)) problems.push_back(fmt("P(s, a = %g, .) outside [0, 1]", a));
        if (!std::isfinite(mdp.reward(s, a, next))) problems.push_back(fmt("non-finite reward at a = %g", a));
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12) problems.push_back(fmt("P(s, a = %g, .) sums to %.15g", a, total));
    }
  for (int s = 0; s < n; ++s) {
    if (mdp.discount(s, n) != 0.0) problems.push_back("terminal transitions must have gamma = 0");
    for (int next = 0; next <= n; ++next)
      if (!(mdp.discount(s, next) >= 0.0 && mdp.discount(s, next) <= 1.0))
        problems.push_back("discount outside [0, 1]");
    if (!(env.behaviour.variance(s) > 0.0)) problems.push_back("behaviour variance must be positive");
  }
  return problems;
}

std::vector<std::pair<std::string, CheckFn>> continuous_checks(const ContinuousEnv& env,
                                                               const VerifyOptions& opt,
                                                               bool& invalid) {
  std::vector<std::pair<std::string, CheckFn>> checks;
  const ContinuousActionMdp& mdp = env.mdp;
  const std::vector<std::string> problems = check_continuous(env);
  invalid = !problems.empty();
  checks.emplace_back("validation", [problems] {
    return make("validation", static_cast<double>(problems.size()), 0.0,
                problems.empty() ? "all tensors valid" : problems.front());
  });
  if (invalid) return checks;
  const int k = static_cast<int>(env.features.cols());
  auto thetas = [&opt, k](double scale) {
    std::mt19937_64 rng(opt.seed);
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < opt.random_thetas; ++i) out.push_back(random_vector(k, rng, scale));
    return out;
  };
  auto gaussian_params = [&opt, k] {
    std::mt19937_64 rng(opt.seed + 7);
    std::vector<GaussianLinearPolicy> out;
    for (int i = 0; i < std::max(1, opt.random_thetas / 4); ++i)
      out.emplace_back(k, random_vector(2 * k, rng, 0.5));
    return out;
  };

  checks.emplace_back("stationary", [&env, &mdp] {
    const Eigen::MatrixXd chain = restart_chain(mdp, env.behaviour);
    const Eigen::VectorXd d = stationary_distribution(chain);
    const double residual = (d.transpose() * chain - d.transpose()).cwiseAbs().maxCoeff();
    return make("stationary", std::max(residual, std::abs(d.sum() - 1.0)), 1e-10,
                fmt("||d'P - d'||_inf = %.3g, min d = %.3g", residual, d.minCoeff()));
  });
  checks.emplace_back("fixed-point", [&env, &mdp, thetas, k] {
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const Eigen::VectorXd iw = weighted_interest(d, mdp.interest);
    double worst = 0.0;
    for (const auto& th : thetas(1.0)) {
      const Eigen::VectorXd actions = env.features * th;
      const Eigen::VectorXd m = deterministic_emphatic_weights(mdp, d, actions);
      worst = std::max(worst, fixed_point_residual(deterministic_kernel(mdp, actions), iw, m));
    }
    return make("fixed-point", worst, 1e-10, "deterministic-policy emphatic weights");
  });
  checks.emplace_back("bellman-gradient", [&env, &mdp, thetas, k] {
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const Eigen::VectorXd iw = weighted_interest(d, mdp.interest);
    double worst = 0.0;
    for (const auto& th : thetas(1.0)) {
      const DeterministicLinearPolicy pi(k, th);
      const DeterministicSolution sol = solve_deterministic(mdp, d, pi, env.features);
      const Eigen::MatrixXd kernel = deterministic_kernel(mdp, sol.actions);
      Eigen::MatrixXd g(mdp.n_states, k);
      for (int s = 0; s < mdp.n_states; ++s) g.row(s) = sol.dq_da(s) * env.features.row(s);
      const Eigen::MatrixXd vdot = value_gradients(kernel, g);
      worst = std::max(worst, (vdot - g - kernel * vdot).cwiseAbs().maxCoeff());
      worst = std::max(worst, (vdot.transpose() * iw - sol.grad).cwiseAbs().maxCoeff());
    }
    return make("bellman-gradient", worst, 1e-10, "deterministic value-gradient recursion");
  });
  checks.emplace_back("gradient-fd", [&env, &mdp, thetas, gaussian_params, k] {
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    double det = 0.0, gauss = 0.0;
    for (const auto& th : thetas(1.0)) {
      const Eigen::VectorXd g = deterministic_true_gradient(mdp, d, DeterministicLinearPolicy(k, th), env.features);
      const Eigen::VectorXd fd = central_difference(
          [&](const Eigen::VectorXd& x) { return deterministic_objective(mdp, d, env.features * x); }, th);
      det = std::max(det, relative_error(g, fd));
    }
    for (const auto& pi : gaussian_params()) {
      const Eigen::VectorXd g = solve_gaussian(mdp, d, pi, env.features).grad;
      const Eigen::VectorXd fd = central_difference(
          [&](const Eigen::VectorXd& x) { return gaussian_objective(mdp, d, GaussianLinearPolicy(k, x), env.features); },
          pi.parameters());
      gauss = std::max(gauss, relative_error(g, fd));
    }
    return make("gradient-fd", std::max(det, gauss), 1e-4,
                fmt("deterministic rel err %.3g, gaussian rel err %.3g", det, gauss));
  });
  checks.emplace_back("endpoint", [&env, &mdp, gaussian_params] {
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const Eigen::VectorXd iw = weighted_interest(d, mdp.interest);
    double exact = 0.0;
    for (const auto& pi : gaussian_params())
      exact = std::max(exact, (solve_gaussian(mdp, d, pi, env.features, 0.0).m_lambda - iw).cwiseAbs().maxCoeff());
    return make("endpoint", exact > 0.0 ? std::numeric_limits<double>::infinity() : 0.0, 0.0,
                fmt("|m_0 - d i|_inf = %.3g", exact));
  });
  checks.emplace_back("unbiasedness", [&env, &mdp, &opt, k] {
    const DeterministicLinearPolicy pi(k);
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const DeterministicSolution sol = solve_deterministic(mdp, d, pi, env.features);
    const McGradient emph = mc_dpg_gradient(env, pi, DpgWeighting::ExactEmphasis, opt.mc_episodes, opt.seed, opt.exec);
    const McGradient unit = mc_dpg_gradient(env, pi, DpgWeighting::Unit, opt.mc_episodes, opt.seed + 1, opt.exec);
    const double z = std::max(max_z(emph, sol.grad), max_z(unit, sol.semi_grad));
    return make("unbiasedness", z, 3.0, "True-DPGE and DPG mean updates vs exact gradients, in standard errors");
  });
  checks.emplace_back("weighting", [&env, &mdp, &opt, k] {
    const GaussianLinearPolicy pi(k);
    const Eigen::VectorXd d = stationary_distribution(mdp, env.behaviour);
    const Eigen::VectorXd m = solve_gaussian(mdp, d, pi, env.features).m;
    GaussianAce actor(pi, env.behaviour, env.features, mdp.interest, 1.0, 1.0);
    ContinuousStream stream(mdp, env.behaviour, opt.seed + 2);
    Eigen::VectorXd sum_m = Eigen::VectorXd::Zero(mdp.n_states), visits = sum_m;
    for (long long t = 0; t < opt.weighting_steps; ++t) {
      const ContinuousTransition tr = stream.next();
      sum_m(tr.state) += actor.advance_trace(tr);
      visits(tr.state) += 1.0;
    }
    Eigen::VectorXd est = Eigen::VectorXd::Zero(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s)
      if (visits(s) > 0) est(s) = d(s) * sum_m(s) / visits(s);
    return make("weighting", (est - m).cwiseAbs().maxCoeff(), 0.01,
                "Gaussian target, ||d E[M|s] - m||_inf over " + std::to_string(opt.weighting_steps) + " steps");
  });
  checks.emplace_back("sum-grad-zero", [&env, &mdp, gaussian_params] {
    double worst = 0.0;
    for (const auto& pi : gaussian_params())
      for (int s = 0; s < mdp.n_states; ++s) {
        const Eigen::VectorXd x = env.features.row(s).transpose();
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(pi.dim());
        const GaussHermite& rule = default_quadrature();
        const double scale = std::numbers::sqrt2 * pi.stddev(x);
        for (int i = 0; i < rule.size(); ++i)
          acc += rule.weights()(i) / std::sqrt(std::numbers::pi) *
                 pi.log_prob_grad(x, pi.mean(x) + scale * rule.nodes()(i));
        worst = std::max(worst, acc.cwiseAbs().maxCoeff());
      }
    return make("sum-grad-zero", worst, 1e-12, "max |E_pi[grad ln pi]| by quadrature");
  });
  return checks;
}

}  // namespace

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"validation", "stationary",   "fixed-point",
                                              "bellman-gradient", "gradient-fd", "endpoint",
                                              "unbiasedness", "weighting",   "sum-grad-zero"};
  return names;
}

std::vector<CheckResult> verify_env(const std::string& env_id, const VerifyOptions& opt) {
  for (const std::string& c : opt.checks)
    if (std::find(check_names().begin(), check_names().end(), c) == check_names().end())
      throw ConfigInvalid("unknown check '" + c + "'");
  auto wanted = [&](const std::string& name) {
    return opt.checks.empty() || std::find(opt.checks.begin(), opt.checks.end(), name) != opt.checks.end();
  };

  std::vector<CheckResult> results;
  DiscreteEnv discrete;
  ContinuousEnv continuous;
  std::vector<std::pair<std::string, CheckFn>> checks;
  bool invalid = false;
  try {
    if (is_continuous_env(env_id)) {
      continuous = make_continuous();
      checks = continuous_checks(continuous, opt, invalid);
    } else {
      const bool builtin = std::find(env_ids().begin(), env_ids().end(), env_id) != env_ids().end();
      discrete = builtin ? make_discrete_env(env_id) : load_env(env_id, false);
      checks = tabular_checks(discrete, opt, invalid);
    }
  } catch (const Error& e) {
    CheckResult r = make("validation", std::numeric_limits<double>::infinity(), 0.0, e.what());
    results.push_back(r);
    return results;
  }

  for (auto& [name, fn] : checks) {
    if (!wanted(name)) continue;
    try {
      results.push_back(fn());
    } catch (const Error& e) {
      results.push_back(make(name, std::numeric_limits<double>::infinity(), 0.0, e.what()));
    }
  }
  if (invalid)
    for (const std::string& name : check_names())
      if (name != "validation" && wanted(name)) results.push_back(skipped(name, "skipped: MDP failed validation"));
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  bool invalid = false;
  for (const CheckResult& r : results) {
    if (!r.pass) return false;
    invalid = invalid || r.skipped;
  }
  return !invalid;
}

std::string format_verify(const std::vector<CheckResult>& results) {
  std::string out;
  char buf[512];
  for (const CheckResult& r : results) {
    const char* status = r.skipped ? "SKIP" : r.pass ? "PASS" : "FAIL";
    if (r.skipped)
      std::snprintf(buf, sizeof buf, "%-4s %-17s %s\n", status, r.name.c_str(), r.detail.c_str());
    else
      std::snprintf(buf, sizeof buf, "%-4s %-17s error %-11.4g tol %-9.3g %s\n", status, r.name.c_str(),
                    r.error, r.tolerance, r.detail.c_str());
    out += buf;
  }
  return out;
}

nlohmann::json verify_json(const std::vector<CheckResult>& results) {
  nlohmann::json out = nlohmann::json::array();
  for (const CheckResult& r : results)
    out.push_back({{"name", r.name},
                   {"pass", r.pass},
                   {"skipped", r.skipped},
                   {"error", std::isfinite(r.error) ? nlohmann::json(r.error) : nlohmann::json("inf")},
                   {"tolerance", r.tolerance},
                   {"detail", r.detail}});
  return out;
}

}  // namespace emphatic::harness
