#include "emphatic/harness/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "emphatic/envs.hpp"
#include "emphatic/errors.hpp"

namespace emphatic::harness {

namespace {

template <typename Enum>
struct Names;

template <>
struct Names<ActorKind> {
  static constexpr std::pair<ActorKind, const char*> table[] = {{ActorKind::Ace, "ace"},
                                                                {ActorKind::TrueAce, "true-ace"},
                                                                {ActorKind::Dpg, "dpg"},
                                                                {ActorKind::TrueDpge, "true-dpge"}};
};
template <>
struct Names<CriticKind> {
  static constexpr std::pair<CriticKind, const char*> table[] = {{CriticKind::Oracle, "oracle"},
                                                                 {CriticKind::Gtd, "gtd"}};
};
template <>
struct Names<InitKind> {
  static constexpr std::pair<InitKind, const char*> table[] = {
      {InitKind::Zero, "zero"}, {InitKind::NearOptimal, "near-optimal"}};
};
template <>
struct Names<UpdateMode> {
  static constexpr std::pair<UpdateMode, const char*> table[] = {
      {UpdateMode::Sampled, "sampled"}, {UpdateMode::Expected, "expected"}};
};

template <typename Enum>
std::string name_of(Enum value) {
  for (const auto& [v, n] : Names<Enum>::table)
    if (v == value) return n;
  return "?";
}

template <typename Enum>
Enum parse_enum(const nlohmann::json& value, const char* key) {
  if (!value.is_string()) throw ConfigInvalid(std::string("'") + key + "' must be a string");
  const auto text = value.get<std::string>();
  std::string options;
  for (const auto& [v, n] : Names<Enum>::table) {
    if (text == n) return v;
    options += options.empty() ? n : std::string(", ") + n;
  }
  throw ConfigInvalid(std::string("'") + key + "' must be one of {" + options + "}, got '" +
                      text + "'");
}

std::vector<double> parse_grid(const nlohmann::json& value, const char* key) {
  if (value.is_number()) return {value.get<double>()};
  if (!value.is_array()) throw ConfigInvalid(std::string("'") + key + "' must be a number list");
  std::vector<double> out;
  for (const auto& v : value) {
    if (!v.is_number()) throw ConfigInvalid(std::string("'") + key + "' must be a number list");
    out.push_back(v.get<double>());
  }
  return out;
}

void require_grid(const std::vector<double>& grid, const char* key, double lo, double hi,
                  bool open_lo) {
  if (grid.empty()) throw ConfigInvalid(std::string("'") + key + "' must not be empty");
  for (double v : grid) {
    const bool below = open_lo ? !(v > lo) : !(v >= lo);
    if (!std::isfinite(v) || below || v > hi) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "'%s' entry %g outside %s%g, %g]", key, v,
                    open_lo ? "(" : "[", lo, hi);
      throw ConfigInvalid(buf);
    }
  }
}

}  // namespace

std::string to_string(ActorKind kind) { return name_of(kind); }
std::string to_string(CriticKind kind) { return name_of(kind); }
std::string to_string(InitKind kind) { return name_of(kind); }
std::string to_string(UpdateMode mode) { return name_of(mode); }

long long default_steps(const std::string& env) {
  if (env == "three-state") return 20000;
  return 100000;
}

long long resolved_steps(const ExperimentConfig& config) {
  return config.steps < 0 ? default_steps(config.env) : config.steps;
}

void validate_config(const ExperimentConfig& c) {
  if (c.env.empty()) throw ConfigInvalid("'env' must not be empty");
  const bool known = std::find(env_ids().begin(), env_ids().end(), c.env) != env_ids().end();
  if (!known && !std::filesystem::exists(c.env))
    throw ConfigInvalid("'env' is neither a known id nor an existing file: '" + c.env + "'");
  const bool continuous = is_continuous_env(c.env);
  const bool deterministic = c.actor == ActorKind::Dpg || c.actor == ActorKind::TrueDpge;
  if (deterministic && !continuous)
    throw ConfigInvalid("actor '" + to_string(c.actor) + "' needs a continuous-action env");
  if (continuous && c.critic == CriticKind::Gtd)
    throw ConfigInvalid("the GTD critic is only available for discrete-action envs");
  if (c.critic == CriticKind::Gtd && c.mode == UpdateMode::Expected)
    throw ConfigInvalid("expected-update mode uses exact gradients; use critic 'oracle'");
  if (c.all_actions && (c.critic == CriticKind::Gtd || continuous || c.actor != ActorKind::Ace))
    throw ConfigInvalid("the all-actions branch needs actor 'ace', a discrete env and an oracle critic");
  if (c.init == InitKind::NearOptimal && continuous)
    throw ConfigInvalid("near-optimal initialisation is defined for discrete envs only");

  require_grid(c.lambda_a, "lambda_a", 0.0, 1.0, false);
  require_grid(c.actor_stepsizes, "actor_stepsizes", 0.0, 1e6, true);
  require_grid(c.critic_alpha_v, "critic_alpha_v", 0.0, 1e6, false);
  require_grid(c.critic_alpha_w, "critic_alpha_w", 0.0, 1e6, false);
  require_grid(c.critic_lambda, "critic_lambda", 0.0, 1.0, false);
  if (c.steps < -1) throw ConfigInvalid("'steps' must be non-negative");
  if (c.log_interval <= 0) throw ConfigInvalid("'log_interval' must be positive");
  if (c.runs <= 0) throw ConfigInvalid("'runs' must be positive");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"env", c.env},
          {"actor", to_string(c.actor)},
          {"critic", to_string(c.critic)},
          {"all_actions", c.all_actions},
          {"lambda_a", c.lambda_a},
          {"actor_stepsizes", c.actor_stepsizes},
          {"critic_alpha_v", c.critic_alpha_v},
          {"critic_alpha_w", c.critic_alpha_w},
          {"critic_lambda", c.critic_lambda},
          {"steps", resolved_steps(c)},
          {"log_interval", c.log_interval},
          {"runs", c.runs},
          {"base_seed", c.base_seed},
          {"init", to_string(c.init)},
          {"mode", to_string(c.mode)}};
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigInvalid("config must be a JSON object");
  static const std::set<std::string> keys{
      "env",          "actor",          "critic",         "all_actions",   "lambda_a",
      "actor_stepsizes", "critic_alpha_v", "critic_alpha_w", "critic_lambda", "steps",
      "log_interval", "runs",           "base_seed",      "init",          "mode"};
  for (const auto& [key, value] : doc.items())
    if (!keys.count(key)) throw ConfigInvalid("unknown config key '" + key + "'");

  ExperimentConfig c;
  try {
    if (doc.contains("env")) c.env = doc.at("env").get<std::string>();
    if (doc.contains("actor")) c.actor = parse_enum<ActorKind>(doc.at("actor"), "actor");
    if (doc.contains("critic")) c.critic = parse_enum<CriticKind>(doc.at("critic"), "critic");
    if (doc.contains("all_actions")) c.all_actions = doc.at("all_actions").get<bool>();
    if (doc.contains("lambda_a")) c.lambda_a = parse_grid(doc.at("lambda_a"), "lambda_a");
    if (doc.contains("actor_stepsizes"))
      c.actor_stepsizes = parse_grid(doc.at("actor_stepsizes"), "actor_stepsizes");
    if (doc.contains("critic_alpha_v"))
      c.critic_alpha_v = parse_grid(doc.at("critic_alpha_v"), "critic_alpha_v");
    if (doc.contains("critic_alpha_w"))
      c.critic_alpha_w = parse_grid(doc.at("critic_alpha_w"), "critic_alpha_w");
    if (doc.contains("critic_lambda"))
      c.critic_lambda = parse_grid(doc.at("critic_lambda"), "critic_lambda");
    if (doc.contains("steps")) c.steps = doc.at("steps").get<long long>();
    if (doc.contains("log_interval")) c.log_interval = doc.at("log_interval").get<long long>();
    if (doc.contains("runs")) c.runs = doc.at("runs").get<int>();
    if (doc.contains("base_seed")) c.base_seed = doc.at("base_seed").get<std::uint64_t>();
    if (doc.contains("init")) c.init = parse_enum<InitKind>(doc.at("init"), "init");
    if (doc.contains("mode")) c.mode = parse_enum<UpdateMode>(doc.at("mode"), "mode");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("malformed config: ") + e.what());
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

std::string canonical_dump(const ExperimentConfig& config) { return to_json(config).dump(); }

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_dump(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& c) {
  const bool gtd = c.critic == CriticKind::Gtd;
  // the exact-weighting actors sit at lambda_a = 1, DPG at 0
  std::vector<double> lambdas = c.lambda_a;
  if (c.actor == ActorKind::TrueAce || c.actor == ActorKind::TrueDpge) lambdas = {1.0};
  if (c.actor == ActorKind::Dpg) lambdas = {0.0};
  const std::vector<double> av = gtd ? c.critic_alpha_v : std::vector<double>{c.critic_alpha_v.front()};
  const std::vector<double> aw = gtd ? c.critic_alpha_w : std::vector<double>{c.critic_alpha_w.front()};
  const std::vector<double> lc = gtd ? c.critic_lambda : std::vector<double>{c.critic_lambda.front()};
  std::vector<GridPoint> grid;
  for (double lambda : lambdas)
    for (double alpha : c.actor_stepsizes)
      for (double alpha_v : av)
        for (double alpha_w : aw)
          for (double lambda_c : lc) {
            GridPoint p;
            p.index = static_cast<int>(grid.size());
            p.lambda_a = lambda;
            p.alpha = alpha;
            p.alpha_v = alpha_v;
            p.alpha_w = alpha_w;
            p.lambda_c = lambda_c;
            grid.push_back(p);
          }
  return grid;
}

}  // namespace emphatic::harness
