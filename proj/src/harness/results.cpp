#include "emphatic/harness/results.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "emphatic/errors.hpp"

namespace emphatic::harness {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string run_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03d.csv", index);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigInvalid("cannot write '" + path.string() + "'");
  out << text;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw EmptyInput("missing '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

std::string run_csv(const RunRecord& record) {
  std::string out = "step,J,aliased_metric\n";
  for (const LogRow& row : record.series) {
    out += std::to_string(row.step);
    out += ',';
    out += format_double(row.J);
    out += ',';
    out += format_double(row.aliased_metric);
    out += '\n';
  }
  return out;
}

nlohmann::json summary_json(const ExperimentConfig& config, const std::vector<RunRecord>& records) {
  nlohmann::json runs = nlohmann::json::array();
  for (const RunRecord& r : records) {
    std::vector<std::string> hashes;
    for (const LogRow& row : r.series) hashes.push_back(row.theta_hash);
    nlohmann::json entry = {
        {"index", r.global_index},
        {"grid_index", r.point.index},
        {"run", r.run_index},
        {"seed", r.seed},
        {"lambda_a", r.point.lambda_a},
        {"alpha", r.point.alpha},
        {"alpha_v", r.point.alpha_v},
        {"alpha_w", r.point.alpha_w},
        {"lambda_c", r.point.lambda_c},
        {"file", "runs/" + run_file_name(r.global_index)},
        {"theta", std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size())},
        {"theta_hash", theta_hash(r.theta)},
        {"theta_hashes", hashes},
        {"failure", r.failed() ? nlohmann::json(r.failure) : nlohmann::json()},
        {"failed_step", r.failed_step}};
    if (!r.series.empty()) {
      entry["initial_J"] = r.initial_J();
      entry["final_J"] = r.final_J();
      entry["final_metric"] = r.final_metric();
      entry["final_step"] = r.series.back().step;
    }
    runs.push_back(entry);
  }
  return {{"config_hash", config_hash(config)}, {"runs", runs}};
}

fs::path write_results(const ExperimentConfig& config, const std::vector<RunRecord>& records,
                       const fs::path& root) {
  const fs::path dir = root / config_hash(config);
  fs::create_directories(dir / "runs");
  write_file(dir / "config.json", to_json(config).dump(2) + "\n");
  for (const RunRecord& r : records) write_file(dir / "runs" / run_file_name(r.global_index), run_csv(r));
  write_file(dir / "summary.json", summary_json(config, records).dump(2) + "\n");
  return dir;
}

ResultSet read_results(const fs::path& dir) {
  ResultSet set;
  set.dir = dir;
  set.config = config_from_json(read_json(dir / "config.json"));
  set.hash = config_hash(set.config);
  const nlohmann::json summary = read_json(dir / "summary.json");
  for (const auto& entry : summary.at("runs")) {
    RunRecord r;
    r.config_hash = set.hash;
    r.global_index = entry.at("index").get<int>();
    r.point.index = entry.at("grid_index").get<int>();
    r.run_index = entry.at("run").get<int>();
    r.seed = entry.at("seed").get<std::uint64_t>();
    r.point.lambda_a = entry.at("lambda_a").get<double>();
    r.point.alpha = entry.at("alpha").get<double>();
    r.point.alpha_v = entry.at("alpha_v").get<double>();
    r.point.alpha_w = entry.at("alpha_w").get<double>();
    r.point.lambda_c = entry.at("lambda_c").get<double>();
    const auto theta = entry.at("theta").get<std::vector<double>>();
    r.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    if (!entry.at("failure").is_null()) r.failure = entry.at("failure").get<std::string>();
    r.failed_step = entry.at("failed_step").get<long long>();
    const auto hashes = entry.at("theta_hashes").get<std::vector<std::string>>();

    std::ifstream in(dir / entry.at("file").get<std::string>());
    if (!in) throw EmptyInput("missing run file for run " + std::to_string(r.global_index));
    std::string line;
    std::getline(in, line);  // header
    std::size_t row_index = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      LogRow row;
      char* end = nullptr;
      row.step = std::strtoll(line.c_str(), &end, 10);
      row.J = std::strtod(end + 1, &end);
      row.aliased_metric = std::strtod(end + 1, &end);
      if (row_index < hashes.size()) row.theta_hash = hashes[row_index];
      ++row_index;
      r.series.push_back(std::move(row));
    }
    set.records.push_back(std::move(r));
  }
  return set;
}

}  // namespace emphatic::harness
