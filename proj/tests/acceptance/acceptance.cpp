// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "emphatic/actors.hpp"
#include "emphatic/continuous.hpp"
#include "emphatic/critics.hpp"
#include "emphatic/envs.hpp"
#include "emphatic/harness/config.hpp"
#include "emphatic/harness/report.hpp"
#include "emphatic/harness/runner.hpp"
#include "emphatic/montecarlo.hpp"

using namespace emphatic;
using namespace emphatic::harness;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

ExperimentConfig shipped(const std::string& name) {
  return load_config(std::string(EMPHATIC_SOURCE_DIR) + "/configs/" + name);
}

SoftmaxLinearPolicy point_nine(int features) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(2 * features);
  theta.head(features).setConstant(std::log(9.0));
  return SoftmaxLinearPolicy(2, features, theta);
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

// Best grid cell for one lambda_a, with its per-seed final values.
struct Best {
  const SweepCell* cell = nullptr;
  std::vector<double> final_J;
  std::vector<double> final_metric;
};

Best best_for(const SweepReport& report, const std::vector<RunRecord>& records, double lambda_a) {
  Best best;
  for (const BestChoice& choice : report.best) {
    if (choice.lambda_a != lambda_a || choice.cell < 0) continue;
    best.cell = &report.cells[static_cast<std::size_t>(choice.cell)];
    auto runs = select_cell(records, best.cell->point.index);
    std::sort(runs.begin(), runs.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.run_index < b.run_index; });
    for (const RunRecord& r : runs) {
      best.final_J.push_back(r.final_J());
      best.final_metric.push_back(r.final_metric());
    }
  }
  return best;
}

double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

// One-sided paired t-test of H1: mean(a - b) > 0. Returns the p-value.
double paired_p_value(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 1.0;
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double m = mean(diff);
  double ss = 0.0;
  for (double d : diff) ss += (d - m) * (d - m);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return m > 0.0 ? 0.0 : 1.0;
  const double t = m / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::cdf(boost::math::complement(dist, t));
}

constexpr double kSignificance = 0.05;

Outcome criterion1() {
  const DiscreteEnv env = make_three_state();
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  const double err = (d - Eigen::Vector3d(0.5, 0.125, 0.375)).cwiseAbs().maxCoeff();
  return {err <= 1e-10, fmt("d_mu = (%.12g, %.12g, %.12g), max error %.2e", d(0), d(1), d(2), err)};
}

Outcome criterion2() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
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
      worst = std::max(worst, relative_error(g, fd));
    }
  }
  return {worst <= 1e-6, fmt("worst relative L2 error %.2e over 2 x 20 draws (tolerance 1e-6)", worst)};
}

Outcome criterion3() {
  const ContinuousEnv env = make_continuous();
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd theta(2);
    theta << normal(rng), normal(rng);
    const Eigen::VectorXd g =
        deterministic_true_gradient(env.mdp, d, DeterministicLinearPolicy(2, theta), env.features);
    Eigen::VectorXd fd(2);
    const double h = 1e-5;
    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXd hi = theta, lo = theta;
      hi(i) += h;
      lo(i) -= h;
      fd(i) = (deterministic_objective(env.mdp, d, env.features * hi) -
               deterministic_objective(env.mdp, d, env.features * lo)) /
              (2 * h);
    }
    worst = std::max(worst, relative_error(g, fd));
  }
  return {worst <= 1e-4, fmt("worst relative error %.2e over 20 draws (tolerance 1e-4)", worst)};
}

Outcome criterion4() {
  const DiscreteEnv env = make_three_state();
  const SoftmaxLinearPolicy pi = point_nine(2);
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  const ExactSolution sol = solve_exact(env.mdp, d, pi, env.features, 1.0);
  const McGradient mc = mc_ace_gradient(env, pi, 1.0, 100000, 4);
  double z = 0.0;
  for (Eigen::Index i = 0; i < sol.grad.size(); ++i)
    z = std::max(z, std::abs(mc.mean(i) - sol.grad(i)) / mc.se(i));
  const McEmphasis em = mc_emphasis(env, pi, 1.0, 500000, 4);
  const double linf = (em.weighted - sol.m).cwiseAbs().maxCoeff();
  return {z <= 3.0 && linf <= 0.01 && em.steps >= 1000000,
          fmt("max |z| = %.2f (<= 3), weighting L_inf = %.4f at %lld steps (<= 0.01)", z, linf, em.steps)};
}

Outcome criterion5() {
  const ExperimentConfig config = shipped("counterexample.json");
  const auto records = run_parallel(config);
  const SweepReport report = sweep_report(records);
  const Best semi = best_for(report, records, 0.0);
  const Best ace = best_for(report, records, 1.0);
  if (!semi.cell || !ace.cell) return {false, "missing lambda_a cells"};
  const double optimum = aliased_optimum(make_three_state());
  double semi_initial = 0.0;
  for (const RunRecord& r : select_cell(records, semi.cell->point.index)) semi_initial += r.initial_J();
  semi_initial /= semi.cell->runs;
  const double semi_p = semi.cell->final_metric.mean, semi_j = semi.cell->final_J.mean;
  const double ace_p = ace.cell->final_metric.mean, ace_j = ace.cell->final_J.mean;
  const bool pass = semi.cell->failures == 0 && ace.cell->failures == 0 && semi_p < 0.05 &&
                    semi_j < semi_initial && ace_p > 0.95 && ace_j >= 0.99 * optimum;
  return {pass, fmt("ACE(0): P(A0) = %.4f, J %.4f -> %.4f; ACE(1): P(A0) = %.4f, J = %.4f "
                    "(>= %.4f); %d runs each",
                    semi_p, semi_initial, semi_j, ace_p, ace_j, 0.99 * optimum, semi.cell->runs)};
}

Outcome criterion6() {
  const ExperimentConfig config = shipped("lambda_sweep.json");
  const auto records = run_parallel(config);
  const SweepReport report = sweep_report(records);
  const double optimum = aliased_optimum(make_three_state());
  std::string detail;
  bool pass = true;
  double j0 = 0.0, j25 = 0.0, p0 = 1.0;
  for (double lambda : config.lambda_a) {
    const Best b = best_for(report, records, lambda);
    if (!b.cell) return {false, fmt("no usable cell for lambda_a = %g", lambda)};
    const double j = b.cell->final_J.mean;
    detail += fmt("J(%g) = %.4f @ %g; ", lambda, j, b.cell->point.alpha);
    if (lambda >= 0.5 && j < 0.99 * optimum) pass = false;
    if (lambda == 0.0) {
      j0 = j;
      p0 = b.cell->final_metric.mean;
    }
    if (lambda == 0.25) j25 = j;
  }
  pass = pass && j25 > j0 && p0 < 0.05;
  return {pass, detail + fmt("P(A0 | lambda_a = 0) = %.4f", p0)};
}

Outcome criterion7() {
  // critic alone on a fixed target policy
  const DiscreteEnv env = make_three_state();
  const PolicyTable pi = point_nine(2).table(env.features);
  const Values truth = solve_values(env.mdp, pi);
  GtdCritic critic(one_hot_features(3), GtdParams{0.005, 1e-4, 0.0});
  TabularStream stream(env.mdp, env.behaviour, 17);
  for (int i = 0; i < 100000; ++i) {
    const DiscreteTransition t = stream.next();
    critic.update(t, pi(t.state, t.action) / env.behaviour(t.state, t.action));
  }
  double err = 0.0;
  for (int s = 0; s < 3; ++s) err = std::max(err, std::abs(critic.value(s) - truth.v(s)));

  // actor with the learned critic
  const ExperimentConfig config = shipped("gtd_sweep_reduced.json");
  const auto records = run_parallel(config);
  const SweepReport report = sweep_report(records);
  const double optimum = aliased_optimum(env);
  const Best semi = best_for(report, records, 0.0);
  double best_high = -1e9;
  const SweepCell* high_cell = nullptr;
  for (const BestChoice& choice : report.best) {
    if (choice.lambda_a < 0.5 || choice.cell < 0) continue;
    const SweepCell& cell = report.cells[static_cast<std::size_t>(choice.cell)];
    if (cell.final_J.mean > best_high) {
      best_high = cell.final_J.mean;
      high_cell = &cell;
    }
  }
  if (!semi.cell || !high_cell) return {false, "missing cells"};
  const double semi_j = semi.cell->final_J.mean;
  const bool pass = err <= 0.05 && semi_j < 0.95 * optimum && semi.cell->final_metric.mean < 0.5 &&
                    best_high >= 0.95 * optimum;
  return {pass,
          fmt("critic error %.4f (<= 0.05); ACE(0) best J = %.4f, P(A0) = %.3f; best lambda_a >= 0.5: "
              "J = %.4f (lambda_a %g, alpha %g, alpha_v %g, alpha_w %g, lambda_c %g) vs %.4f",
              err, semi_j, semi.cell->final_metric.mean, best_high, high_cell->point.lambda_a,
              high_cell->point.alpha, high_cell->point.alpha_v, high_cell->point.alpha_w,
              high_cell->point.lambda_c, 0.95 * optimum)};
}

Outcome criterion8() {
  const ExperimentConfig ace_config = shipped("eleven_ace.json");
  const ExperimentConfig true_config = shipped("eleven_true_ace.json");
  const auto ace_records = run_parallel(ace_config);
  const auto true_records = run_parallel(true_config);
  const SweepReport ace_report = sweep_report(ace_records);
  const SweepReport true_report = sweep_report(true_records);
  const Best ace0 = best_for(ace_report, ace_records, 0.0);
  const Best ace1 = best_for(ace_report, ace_records, 1.0);
  const Best exact = best_for(true_report, true_records, 1.0);
  if (!ace0.cell || !ace1.cell || !exact.cell) return {false, "missing cells"};
  const double j_true = mean(exact.final_J), j1 = mean(ace1.final_J), j0 = mean(ace0.final_J);
  const double p_gap_true = paired_p_value(exact.final_J, ace1.final_J);
  const double p_gap_ace = paired_p_value(ace1.final_J, ace0.final_J);
  const bool pass = j_true >= j1 && j1 >= j0 && p_gap_true < kSignificance && p_gap_ace < kSignificance;
  return {pass, fmt("True-ACE %.6f @ %g, ACE(1) %.6f @ %g, ACE(0) %.6f @ %g; one-sided paired p: "
                    "True-ACE > ACE(1) p = %.3g, ACE(1) > ACE(0) p = %.3g (alpha %.2f, %zu seeds)",
                    j_true, exact.cell->point.alpha, j1, ace1.cell->point.alpha, j0,
                    ace0.cell->point.alpha, p_gap_true, p_gap_ace, kSignificance, exact.final_J.size())};
}

Outcome criterion9() {
  const ExperimentConfig dpg_config = shipped("continuous_dpg.json");
  const ExperimentConfig true_config = shipped("continuous_true_dpge.json");
  const auto dpg_records = run_parallel(dpg_config);
  const auto true_records = run_parallel(true_config);
  const SweepReport dpg_report = sweep_report(dpg_records);
  const SweepReport true_report = sweep_report(true_records);
  const Best dpg = best_for(dpg_report, dpg_records, 0.0);
  const Best exact = best_for(true_report, true_records, 1.0);
  if (!dpg.cell || !exact.cell) return {false, "missing cells"};
  const double a_dpg = mean(dpg.final_metric), a_true = mean(exact.final_metric);
  const double j_dpg = mean(dpg.final_J), j_true = mean(exact.final_J);
  const double p = paired_p_value(exact.final_J, dpg.final_J);
  const bool pass = a_dpg > 0.0 && a_true < 0.0 && j_true > j_dpg && p < kSignificance;
  return {pass, fmt("DPG: aliased action %.3f, J = %.4f @ %g; True-DPGE: aliased action %.3f, "
                    "J = %.4f @ %g; one-sided paired p = %.3g over %zu seeds",
                    a_dpg, j_dpg, dpg.cell->point.alpha, a_true, j_true, exact.cell->point.alpha, p,
                    exact.final_J.size())};
}

Outcome criterion10() {
  std::string detail;
  bool pass = true;
  // lambda_a = 0 weighting is d_mu i exactly
  for (const DiscreteEnv& env : {make_three_state(), make_eleven_state()}) {
    const int k = static_cast<int>(env.features.cols());
    const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
    const PolicyTable pi = point_nine(k).table(env.features);
    const Eigen::VectorXd m0 = emphatic_weights(env.mdp, d, pi, 0.0);
    const Eigen::VectorXd di = weighted_interest(d, env.mdp.interest);
    if ((m0.array() != di.array()).any()) {
      pass = false;
      detail += env.name + ": m_0 != d i; ";
    }
  }
  // ACE(0) with unit interest against a hand-coded OffPAC actor
  {
    const DiscreteEnv env = make_three_state();
    const double alpha = 0.1;
    SoftmaxAce actor(SoftmaxLinearPolicy(2, 2), env.behaviour, env.features, Eigen::VectorXd::Ones(3),
                     alpha, 0.0);
    SoftmaxLinearPolicy offpac(2, 2);
    TabularOracleCritic ca(env.mdp), cb(env.mdp);
    ca.refresh(actor.policy().table(env.features));
    cb.refresh(offpac.table(env.features));
    TabularStream stream(env.mdp, env.behaviour, 10);
    int mismatches = 0;
    for (int i = 0; i < 20000; ++i) {
      const DiscreteTransition t = stream.next();
      const Eigen::VectorXd inc = actor.step(t, ca.td_error(t));
      ca.refresh(actor.policy().table(env.features));
      const Eigen::VectorXd x = env.features.row(t.state).transpose();
      const double rho = offpac.probability(x, t.action) / env.behaviour(t.state, t.action);
      const Eigen::VectorXd ref = (alpha * rho * cb.td_error(t)) * offpac.log_prob_grad(x, t.action);
      offpac.add_to_parameters(ref);
      cb.refresh(offpac.table(env.features));
      if ((inc.array() != ref.array()).any()) ++mismatches;
    }
    if (mismatches > 0 || (actor.policy().parameters().array() != offpac.parameters().array()).any()) {
      pass = false;
      detail += fmt("OffPAC stream differs at %d steps; ", mismatches);
    } else {
      detail += "OffPAC stream identical over 20000 updates; ";
    }
  }
  // probability gradients sum to zero
  {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> normal(0.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd theta(3 * 4), x(4);
      for (int i = 0; i < theta.size(); ++i) theta(i) = normal(rng);
      for (int i = 0; i < 4; ++i) x(i) = normal(rng);
      worst = std::max(worst, SoftmaxLinearPolicy(3, 4, theta).prob_jacobian(x).colwise().sum().cwiseAbs().maxCoeff());
    }
    if (worst > 1e-12) pass = false;
    detail += fmt("max |sum_a grad pi| = %.1e; ", worst);
  }
  // environment tensors
  int problems = 0;
  for (const DiscreteEnv& env : {make_three_state(), make_eleven_state()}) {
    problems += static_cast<int>(check_mdp(env.mdp).size());
    try {
      validate_policy_table(env.behaviour, env.mdp.n_states, env.mdp.n_actions, "behaviour");
    } catch (const ValidationError&) {
      ++problems;
    }
  }
  {
    const ContinuousEnv env = make_continuous();
    for (double a = -10.0; a <= 10.0; a += 0.5)
      for (int s = 0; s < env.mdp.n_states; ++s) {
        double total = 0.0;
        for (int next = 0; next <= env.mdp.n_states; ++next) {
          const double p = env.mdp.trans(s, a, next);
          if (p < 0.0) ++problems;
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) ++problems;
      }
    if ((env.behaviour.variance.array() <= 0.0).any()) ++problems;
    if ((env.mdp.discount.array() < 0.0).any() || (env.mdp.discount.array() > 1.0).any()) ++problems;
  }
  if (problems > 0) pass = false;
  detail += fmt("%d environment validation problems", problems);
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"exact stationary distribution", criterion1},
      {"policy gradient vs finite differences", criterion2},
      {"deterministic gradient vs finite differences", criterion3},
      {"unbiased emphatic update", criterion4},
      {"counterexample", criterion5},
      {"lambda_a ordering", criterion6},
      {"GTD critic", criterion7},
      {"eleven-state ordering", criterion8},
      {"continuous-action ordering", criterion9},
      {"identities", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
