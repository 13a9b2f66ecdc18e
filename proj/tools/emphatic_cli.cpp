// Command-line entry point: run / sweep / verify / plot / exact / export / report.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "emphatic/continuous.hpp"
#include "emphatic/envs.hpp"
#include "emphatic/errors.hpp"
#include "emphatic/harness/config.hpp"
#include "emphatic/harness/plot.hpp"
#include "emphatic/harness/report.hpp"
#include "emphatic/harness/results.hpp"
#include "emphatic/harness/runner.hpp"
#include "emphatic/harness/verify.hpp"
#include "emphatic/mdp.hpp"

namespace fs = std::filesystem;
using namespace emphatic;
using namespace emphatic::harness;

namespace {

nlohmann::json vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json mat(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
  return rows;
}

Eigen::VectorXd read_theta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open theta file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::vector<double> values;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.is_object()) doc = doc.at("theta");
    values = doc.get<std::vector<double>>();
  } else {
    std::istringstream words(text);
    std::string word;
    while (words >> word) {
      for (char& c : word)
        if (c == ',') c = ' ';
      std::istringstream inner(word);
      double v;
      while (inner >> v) values.push_back(v);
    }
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::VectorXd sized_theta(const std::string& path, Eigen::Index dim) {
  if (path.empty()) return Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd theta = read_theta(path);
  if (theta.size() != dim)
    throw ConfigInvalid("theta has " + std::to_string(theta.size()) + " entries, expected " +
                        std::to_string(dim));
  return theta;
}

nlohmann::json exact_discrete(const DiscreteEnv& env, const std::string& theta_path, double lambda_a) {
  const int k = static_cast<int>(env.features.cols());
  const SoftmaxLinearPolicy pi(env.mdp.n_actions, k,
                               sized_theta(theta_path, static_cast<Eigen::Index>(env.mdp.n_actions) * k));
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  const ExactSolution sol = solve_exact(env.mdp, d, pi, env.features, lambda_a);
  return {{"env", env.name},
          {"policy", "softmax"},
          {"theta", vec(pi.parameters())},
          {"lambda_a", lambda_a},
          {"d_mu", vec(sol.d_mu)},
          {"v", vec(sol.v)},
          {"q", mat(sol.q)},
          {"m", vec(sol.m)},
          {"m_lambda", vec(sol.m_lambda)},
          {"J", sol.J},
          {"true_gradient", vec(sol.grad)},
          {"semi_gradient", vec(sol.semi_grad)},
          {"lambda_gradient", vec(sol.grad_lambda)}};
}

nlohmann::json exact_continuous(const std::string& policy, const std::string& theta_path,
                                double lambda_a) {
  const ContinuousEnv env = make_continuous();
  const int k = static_cast<int>(env.features.cols());
  const Eigen::VectorXd d = stationary_distribution(env.mdp, env.behaviour);
  if (policy == "gaussian") {
    const GaussianLinearPolicy pi(k, sized_theta(theta_path, 2 * k));
    const GaussianSolution sol = solve_gaussian(env.mdp, d, pi, env.features, lambda_a);
    return {{"env", env.name},           {"policy", "gaussian"},
            {"theta", vec(pi.parameters())}, {"lambda_a", lambda_a},
            {"d_mu", vec(d)},            {"mean", vec(sol.mean)},
            {"stddev", vec(sol.stddev)}, {"v", vec(sol.v)},
            {"m", vec(sol.m)},           {"m_lambda", vec(sol.m_lambda)},
            {"J", sol.J},                {"true_gradient", vec(sol.grad)},
            {"semi_gradient", vec(sol.semi_grad)}, {"lambda_gradient", vec(sol.grad_lambda)}};
  }
  const DeterministicLinearPolicy pi(k, sized_theta(theta_path, k));
  const DeterministicSolution sol = solve_deterministic(env.mdp, d, pi, env.features);
  return {{"env", env.name},         {"policy", "deterministic"},
          {"theta", vec(pi.parameters())}, {"d_mu", vec(d)},
          {"actions", vec(sol.actions)}, {"v", vec(sol.v)},
          {"dq_da", vec(sol.dq_da)}, {"m", vec(sol.m)},
          {"J", sol.J},              {"true_gradient", vec(sol.grad)},
          {"semi_gradient", vec(sol.semi_grad)}};
}

std::vector<std::string> split_commas(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const std::string& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-policy actor-critic with emphatic weightings: experiments and exact oracles"};
  app.require_subcommand(1);

  std::string config_path, out_root = "results";
  int threads = 0;
  bool serial = false;
  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_root, "results root directory");
    cmd->add_option("--threads", threads, "worker threads (0 = OpenMP default)");
    cmd->add_flag("--serial", serial, "run sequentially");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "execute every run of a config and persist records");
  add_run_options(run_cmd);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a config and print the stepsize sensitivity table");
  add_run_options(sweep_cmd);

  std::string env_id;
  std::vector<std::string> checks;
  VerifyOptions vopt;
  bool json_out = false;
  CLI::App* verify_cmd = app.add_subcommand("verify", "gradient, fixed-point and Monte Carlo checks");
  verify_cmd->add_option("env", env_id, "env id or MDP description file")->required();
  verify_cmd->add_option("--checks", checks, "comma-separated subset of checks");
  verify_cmd->add_option("--thetas", vopt.random_thetas, "random parameter draws");
  verify_cmd->add_option("--episodes", vopt.mc_episodes, "episodes for the unbiasedness check");
  verify_cmd->add_option("--weighting-steps", vopt.weighting_steps, "steps for the weighting check");
  verify_cmd->add_option("--seed", vopt.seed, "random seed");
  verify_cmd->add_flag("--json", json_out, "print the report as JSON");

  std::vector<std::string> plot_dirs;
  std::string kind = "curves", plot_out;
  CLI::App* plot_cmd = app.add_subcommand("plot", "render result directories as SVG");
  plot_cmd->add_option("dirs", plot_dirs, "result directories")->required()->check(CLI::ExistingDirectory);
  plot_cmd->add_option("--kind", kind, "curves | sensitivity | action-prob");
  plot_cmd->add_option("--out", plot_out, "output SVG (default <first dir>/<kind>.svg)");

  std::string theta_path, policy_kind = "deterministic";
  double lambda_a = 0.9;
  CLI::App* exact_cmd = app.add_subcommand("exact", "print exact d_mu, v, q, m, J and gradients as JSON");
  exact_cmd->add_option("env", env_id, "env id or MDP description file")->required();
  exact_cmd->add_option("--theta", theta_path, "policy parameters (JSON array or whitespace list)");
  exact_cmd->add_option("--lambda-a", lambda_a, "lambda_a for m_lambda")->check(CLI::Range(0.0, 1.0));
  exact_cmd->add_option("--policy", policy_kind, "continuous env policy: deterministic | gaussian")
      ->check(CLI::IsMember({"deterministic", "gaussian"}));

  std::string export_path;
  CLI::App* export_cmd = app.add_subcommand("export", "write a discrete env as an MDP description file");
  export_cmd->add_option("env", env_id, "env id")->required();
  export_cmd->add_option("file", export_path, "output path")->required();

  std::string report_dir;
  CLI::App* report_cmd = app.add_subcommand("report", "sensitivity table for an existing result directory");
  report_cmd->add_option("dir", report_dir, "result directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd || *sweep_cmd) {
      const ExperimentConfig config = load_config(config_path);
      const std::vector<RunRecord> records = serial ? run_serial(config) : run_parallel(config, threads);
      const fs::path dir = write_results(config, records, out_root);
      int failures = 0;
      for (const RunRecord& r : records) failures += r.failed() ? 1 : 0;
      std::printf("%s\n", dir.string().c_str());
      std::printf("%zu runs, %d failed\n", records.size(), failures);
      if (*sweep_cmd) {
        const SweepReport report = sweep_report(records);
        std::ofstream(dir / "report.json") << report_json(report).dump(2) << '\n';
        std::printf("%s", format_report(report).c_str());
      }
      return 0;
    }
    if (*verify_cmd) {
      vopt.checks = split_commas(checks);
      const auto results = verify_env(env_id, vopt);
      if (json_out)
        std::printf("%s\n", verify_json(results).dump(2).c_str());
      else
        std::printf("%s", format_verify(results).c_str());
      return all_passed(results) ? 0 : 1;
    }
    if (*plot_cmd) {
      std::vector<ResultSet> sets;
      for (const std::string& d : plot_dirs) sets.push_back(read_results(d));
      const fs::path out = plot_out.empty() ? fs::path(plot_dirs.front()) / (kind + ".svg") : fs::path(plot_out);
      write_plot(sets, parse_plot_kind(kind), out);
      std::printf("%s\n", out.string().c_str());
      return 0;
    }
    if (*exact_cmd) {
      const nlohmann::json doc = is_continuous_env(env_id)
                                     ? exact_continuous(policy_kind, theta_path, lambda_a)
                                     : exact_discrete(make_discrete_env(env_id), theta_path, lambda_a);
      std::printf("%s\n", doc.dump(2).c_str());
      return 0;
    }
    if (*export_cmd) {
      save_env(make_discrete_env(env_id), export_path);
      std::printf("%s\n", export_path.c_str());
      return 0;
    }
    if (*report_cmd) {
      const ResultSet set = read_results(report_dir);
      std::printf("%s", format_report(sweep_report(set.records)).c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
