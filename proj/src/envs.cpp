#include "emphatic/envs.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "emphatic/critics.hpp"
#include "emphatic/errors.hpp"

namespace emphatic {

namespace {

void set_transition(TabularMdp& mdp, int s, int a, int next, double p, double r, double gamma) {
  const auto row = mdp.row(s, a);
  mdp.trans(row, next) = p;
  mdp.reward(row, next) = r;
  mdp.discount(row, next) = gamma;
}

// Same successor for both actions, gamma = 0 into the terminal state.
void set_both(TabularMdp& mdp, int s, int next, double r0, double r1) {
  const double gamma = next == mdp.terminal() ? 0.0 : 1.0;
  set_transition(mdp, s, 0, next, 1.0, r0, gamma);
  set_transition(mdp, s, 1, next, 1.0, r1, gamma);
}

PolicyTable uniform_behaviour(int n_states, double p0) {
  PolicyTable mu(n_states, 2);
  mu.col(0).setConstant(p0);
  mu.col(1).setConstant(1.0 - p0);
  return mu;
}

}  // namespace

DiscreteEnv make_three_state() {
  DiscreteEnv env;
  env.name = "three-state";
  TabularMdp mdp(3, 2);
  set_transition(mdp, 0, 0, 1, 1.0, 0.0, 1.0);
  set_transition(mdp, 0, 1, 2, 1.0, 0.0, 1.0);
  set_both(mdp, 1, mdp.terminal(), 2.0, 0.0);
  set_both(mdp, 2, mdp.terminal(), 0.0, 1.0);
  mdp.start = Eigen::VectorXd::Zero(3);
  mdp.start(0) = 1.0;
  mdp.interest = Eigen::VectorXd::Ones(3);
  env.mdp = std::move(mdp);
  env.features.resize(3, 2);
  env.features << 1, 0, 0, 1, 0, 1;
  env.behaviour = uniform_behaviour(3, 0.25);
  env.aliased_states = aliased_states(env.features);
  validate_mdp(env.mdp);
  return env;
}

DiscreteEnv make_eleven_state(double s10_reward) {
  DiscreteEnv env;
  env.name = "eleven-state";
  TabularMdp mdp(11, 2);
  set_transition(mdp, 0, 0, 1, 1.0, 0.0, 1.0);
  set_transition(mdp, 0, 1, 5, 1.0, 0.0, 1.0);
  for (int s = 1; s <= 3; ++s) set_both(mdp, s, s + 1, 0.0, 0.0);
  set_both(mdp, 4, 9, 0.0, 0.0);
  for (int s = 5; s <= 7; ++s) set_both(mdp, s, s + 1, 0.0, 0.0);
  set_both(mdp, 8, 10, 0.0, 0.0);
  set_both(mdp, 9, mdp.terminal(), 2.0, 0.0);
  set_both(mdp, 10, mdp.terminal(), 0.0, s10_reward);
  mdp.start = Eigen::VectorXd::Zero(11);
  mdp.start(0) = 1.0;
  mdp.interest = Eigen::VectorXd::Ones(11);
  env.mdp = std::move(mdp);
  env.features = FeatureMap::Zero(11, 10);
  for (int s = 0; s <= 8; ++s) env.features(s, s) = 1.0;
  env.features(9, 9) = 1.0;
  env.features(10, 9) = 1.0;
  env.behaviour = uniform_behaviour(11, 0.25);
  env.aliased_states = aliased_states(env.features);
  validate_mdp(env.mdp);
  return env;
}

double sigmoid_prime(double a) {
  const double s = logistic(a);
  return s * (1.0 - s);
}

double continuous_q_s0(double a, double v1, double v2) {
  return (1.0 - logistic(a)) * v1 + logistic(a) * v2;
}
double continuous_dq_s0(double a, double v1, double v2) { return sigmoid_prime(a) * (v2 - v1); }
double continuous_q_s1(double a) { return 2.0 * logistic(-a); }
double continuous_q_s2(double a) { return logistic(a); }
double continuous_dq_s1(double a) { return -2.0 * sigmoid_prime(-a); }
double continuous_dq_s2(double a) { return sigmoid_prime(a); }

ContinuousEnv make_continuous() {
  ContinuousEnv env;
  env.name = "continuous";
  ContinuousActionMdp& mdp = env.mdp;
  mdp.n_states = 3;
  constexpr int kTerminal = 3;
  mdp.trans = [](int s, double a, int next) {
    if (s == 0) return next == 1 ? 1.0 - logistic(a) : next == 2 ? logistic(a) : 0.0;
    return next == kTerminal ? 1.0 : 0.0;
  };
  mdp.trans_da = [](int s, double a, int next) {
    if (s != 0) return 0.0;
    return next == 1 ? -sigmoid_prime(a) : next == 2 ? sigmoid_prime(a) : 0.0;
  };
  mdp.reward = [](int s, double a, int next) {
    if (next != kTerminal) return 0.0;
    return s == 1 ? continuous_q_s1(a) : s == 2 ? continuous_q_s2(a) : 0.0;
  };
  mdp.reward_da = [](int s, double a, int next) {
    if (next != kTerminal) return 0.0;
    return s == 1 ? continuous_dq_s1(a) : s == 2 ? continuous_dq_s2(a) : 0.0;
  };
  mdp.discount = Eigen::MatrixXd::Zero(3, 4);
  mdp.discount(0, 1) = 1.0;
  mdp.discount(0, 2) = 1.0;
  mdp.start = Eigen::VectorXd::Zero(3);
  mdp.start(0) = 1.0;
  mdp.interest = Eigen::VectorXd::Ones(3);
  env.features.resize(3, 2);
  env.features << 1, 0, 0, 1, 0, 1;
  env.behaviour.mean = Eigen::VectorXd::Ones(3);
  env.behaviour.variance = Eigen::VectorXd::Ones(3);
  env.aliased_states = aliased_states(env.features);
  return env;
}

bool is_continuous_env(const std::string& id) { return id == "continuous"; }

DiscreteEnv make_discrete_env(const std::string& id) {
  if (id == "three-state") return make_three_state();
  if (id == "eleven-state") return make_eleven_state();
  if (id == "continuous") throw ConfigInvalid("env 'continuous' has a continuous action space");
  return load_env(id);
}

std::vector<int> aliased_states(const FeatureMap& features) {
  std::vector<int> out;
  for (int s = 0; s < features.rows(); ++s)
    for (int t = 0; t < features.rows(); ++t)
      if (s != t && features.row(s) == features.row(t)) {
        out.push_back(s);
        break;
      }
  return out;
}

double aliased_optimum(const DiscreteEnv& env, PolicyTable* best) {
  const int n = env.mdp.n_states;
  const int n_actions = env.mdp.n_actions;
  // group states by feature row
  std::vector<int> group(static_cast<std::size_t>(n), -1);
  int groups = 0;
  for (int s = 0; s < n; ++s) {
    if (group[static_cast<std::size_t>(s)] >= 0) continue;
    for (int t = s; t < n; ++t)
      if (group[static_cast<std::size_t>(t)] < 0 && env.features.row(s) == env.features.row(t))
        group[static_cast<std::size_t>(t)] = groups;
    ++groups;
  }
  double combos = std::pow(static_cast<double>(n_actions), groups);
  if (combos > 1e7) throw ValidationError("too many feature groups to enumerate policies");

  const Eigen::VectorXd d_mu = stationary_distribution(env.mdp, env.behaviour);
  double best_j = -std::numeric_limits<double>::infinity();
  std::vector<int> choice(static_cast<std::size_t>(groups), 0);
  PolicyTable pi(n, n_actions);
  for (long long c = 0; c < static_cast<long long>(combos); ++c) {
    long long rest = c;
    for (int g = 0; g < groups; ++g) {
      choice[static_cast<std::size_t>(g)] = static_cast<int>(rest % n_actions);
      rest /= n_actions;
    }
    pi.setZero();
    for (int s = 0; s < n; ++s)
      pi(s, choice[static_cast<std::size_t>(group[static_cast<std::size_t>(s)])]) = 1.0;
    double j = 0.0;
    try {
      j = objective(env.mdp, d_mu, pi);
    } catch (const SingularSystem&) {
      continue;  // policy never terminates
    }
    if (j > best_j) {
      best_j = j;
      if (best) *best = pi;
    }
  }
  return best_j;
}

// ---------------------------------------------------------------------------

nlohmann::json env_to_json(const DiscreteEnv& env) {
  const TabularMdp& mdp = env.mdp;
  nlohmann::json doc;
  doc["name"] = env.name;
  doc["states"] = mdp.n_states;
  doc["actions"] = mdp.n_actions;
  nlohmann::json trans = nlohmann::json::array();
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a)
      for (int next = 0; next <= mdp.n_states; ++next) {
        if (mdp.p(s, a, next) == 0.0) continue;
        trans.push_back({{"s", s},
                         {"a", a},
                         {"s'", next},
                         {"p", mdp.p(s, a, next)},
                         {"r", mdp.r(s, a, next)},
                         {"gamma", mdp.gamma(s, a, next)}});
      }
  doc["transitions"] = trans;
  doc["start"] = std::vector<double>(mdp.start.data(), mdp.start.data() + mdp.start.size());
  doc["interest"] =
      std::vector<double>(mdp.interest.data(), mdp.interest.data() + mdp.interest.size());
  nlohmann::json mu = nlohmann::json::array();
  for (int s = 0; s < env.behaviour.rows(); ++s) {
    std::vector<double> row(static_cast<std::size_t>(env.behaviour.cols()));
    for (int a = 0; a < env.behaviour.cols(); ++a) row[static_cast<std::size_t>(a)] = env.behaviour(s, a);
    mu.push_back(row);
  }
  doc["behaviour"] = mu;
  nlohmann::json feats = nlohmann::json::array();
  for (int s = 0; s < env.features.rows(); ++s) {
    std::vector<double> row(static_cast<std::size_t>(env.features.cols()));
    for (int j = 0; j < env.features.cols(); ++j) row[static_cast<std::size_t>(j)] = env.features(s, j);
    feats.push_back(row);
  }
  doc["features"] = feats;
  return doc;
}

namespace {

Eigen::VectorXd read_vector(const nlohmann::json& doc, const char* key, int size) {
  if (!doc.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  const auto values = doc.at(key).get<std::vector<double>>();
  if (static_cast<int>(values.size()) != size)
    throw ValidationError(std::string("field '") + key + "' has " +
                          std::to_string(values.size()) + " entries, expected " +
                          std::to_string(size));
  return Eigen::Map<const Eigen::VectorXd>(values.data(), size);
}

Eigen::MatrixXd read_matrix(const nlohmann::json& rows, const char* key, int n_rows) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != n_rows)
    throw ValidationError(std::string("field '") + key + "' must have one row per state");
  Eigen::MatrixXd out;
  for (int s = 0; s < n_rows; ++s) {
    const auto row = rows.at(static_cast<std::size_t>(s)).get<std::vector<double>>();
    if (s == 0) out.resize(n_rows, static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != out.cols())
      throw ValidationError(std::string("field '") + key + "' has ragged rows");
    for (std::size_t j = 0; j < row.size(); ++j) out(s, static_cast<Eigen::Index>(j)) = row[j];
  }
  return out;
}

}  // namespace

DiscreteEnv env_from_json(const nlohmann::json& doc, bool validate) {
  DiscreteEnv env;
  try {
    env.name = doc.value("name", std::string("custom"));
    const int n = doc.at("states").get<int>();
    const int n_actions = doc.at("actions").get<int>();
    if (n < 1 || n_actions < 1) throw ValidationError("states and actions must be positive");
    TabularMdp mdp(n, n_actions);
    for (const auto& t : doc.at("transitions")) {
      const int s = t.at("s").get<int>();
      const int a = t.at("a").get<int>();
      const int next = t.contains("s'") ? t.at("s'").get<int>() : t.at("next").get<int>();
      if (s < 0 || s >= n || a < 0 || a >= n_actions || next < 0 || next > n)
        throw ValidationError("transition index out of range: (" + std::to_string(s) + ", " +
                              std::to_string(a) + ", " + std::to_string(next) + ")");
      const auto row = mdp.row(s, a);
      mdp.trans(row, next) += t.at("p").get<double>();
      mdp.reward(row, next) = t.value("r", 0.0);
      mdp.discount(row, next) = t.value("gamma", next == n ? 0.0 : 1.0);
    }
    mdp.start = read_vector(doc, "start", n);
    mdp.interest = doc.contains("interest") ? read_vector(doc, "interest", n)
                                            : Eigen::VectorXd::Ones(n);
    env.mdp = std::move(mdp);
    env.behaviour = read_matrix(doc.at("behaviour"), "behaviour", n);
    env.features = doc.contains("features") ? read_matrix(doc.at("features"), "features", n)
                                            : one_hot_features(n);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed MDP description: ") + e.what());
  }
  env.aliased_states = aliased_states(env.features);
  if (validate) {
    validate_mdp(env.mdp);
    validate_policy_table(env.behaviour, env.mdp.n_states, env.mdp.n_actions, "behaviour");
  }
  return env;
}

DiscreteEnv load_env(const std::filesystem::path& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open MDP description '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return env_from_json(doc, validate);
}

void save_env(const DiscreteEnv& env, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot write '" + path.string() + "'");
  out << env_to_json(env).dump(2) << '\n';
}

}  // namespace emphatic
