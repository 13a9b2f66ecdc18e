#include "emphatic/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "emphatic/errors.hpp"

namespace emphatic::harness {

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe out;
  out.n = static_cast<int>(values.size());
  if (values.empty()) {
    out.mean = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / out.n;
  if (out.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (out.n - 1)) / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

SweepReport sweep_report(const std::vector<RunRecord>& records) {
  if (records.empty()) throw EmptyInput("sweep_report needs at least one run record");
  std::map<int, std::vector<const RunRecord*>> by_cell;
  for (const RunRecord& r : records) by_cell[r.point.index].push_back(&r);

  SweepReport report;
  for (const auto& [index, group] : by_cell) {
    SweepCell cell;
    cell.point = group.front()->point;
    cell.runs = static_cast<int>(group.size());
    std::vector<double> js;
    std::vector<double> metrics;
    for (const RunRecord* r : group) {
      if (r->failed() || r->series.empty()) {
        ++cell.failures;
        continue;
      }
      js.push_back(r->final_J());
      metrics.push_back(r->final_metric());
    }
    cell.final_J = mean_se(js);
    cell.final_metric = mean_se(metrics);
    report.cells.push_back(cell);
  }

  std::map<double, int> best;
  for (int i = 0; i < static_cast<int>(report.cells.size()); ++i) {
    const SweepCell& cell = report.cells[static_cast<std::size_t>(i)];
    auto it = best.find(cell.point.lambda_a);
    if (it == best.end()) it = best.emplace(cell.point.lambda_a, -1).first;
    if (cell.failures > 0 || !std::isfinite(cell.final_J.mean)) continue;
    if (it->second < 0 ||
        cell.final_J.mean > report.cells[static_cast<std::size_t>(it->second)].final_J.mean)
      it->second = i;
  }
  for (const auto& [lambda, cell] : best) report.best.push_back({lambda, cell});
  return report;
}

std::string format_report(const SweepReport& report) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-9s %-10s %-10s %-10s %-9s %5s %5s  %-24s %s\n", "lambda_a",
                "alpha", "alpha_v", "alpha_w", "lambda_c", "runs", "fail", "final J (mean +- se)",
                "final metric");
  out += buf;
  for (const SweepCell& c : report.cells) {
    std::snprintf(buf, sizeof buf, "%-9g %-10g %-10g %-10g %-9g %5d %5d  %.6f +- %-10.6f %.6f +- %.6f\n",
                  c.point.lambda_a, c.point.alpha, c.point.alpha_v, c.point.alpha_w,
                  c.point.lambda_c, c.runs, c.failures, c.final_J.mean, c.final_J.se,
                  c.final_metric.mean, c.final_metric.se);
    out += buf;
  }
  out += "\nbest per lambda_a:\n";
  for (const BestChoice& b : report.best) {
    if (b.cell < 0) {
      std::snprintf(buf, sizeof buf, "  lambda_a=%g: no completed grid point\n", b.lambda_a);
    } else {
      const SweepCell& c = report.cells[static_cast<std::size_t>(b.cell)];
      std::snprintf(buf, sizeof buf, "  lambda_a=%g: alpha=%g final J %.6f +- %.6f\n", b.lambda_a,
                    c.point.alpha, c.final_J.mean, c.final_J.se);
    }
    out += buf;
  }
  return out;
}

nlohmann::json report_json(const SweepReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const SweepCell& c : report.cells)
    cells.push_back({{"grid_index", c.point.index},
                     {"lambda_a", c.point.lambda_a},
                     {"alpha", c.point.alpha},
                     {"alpha_v", c.point.alpha_v},
                     {"alpha_w", c.point.alpha_w},
                     {"lambda_c", c.point.lambda_c},
                     {"runs", c.runs},
                     {"failures", c.failures},
                     {"final_J_mean", c.final_J.mean},
                     {"final_J_se", c.final_J.se},
                     {"final_metric_mean", c.final_metric.mean},
                     {"final_metric_se", c.final_metric.se}});
  nlohmann::json best = nlohmann::json::array();
  for (const BestChoice& b : report.best)
    best.push_back({{"lambda_a", b.lambda_a},
                    {"grid_index", b.cell < 0 ? nlohmann::json()
                                              : nlohmann::json(report.cells[static_cast<std::size_t>(b.cell)].point.index)}});
  return {{"cells", cells}, {"best", best}};
}

std::vector<RunRecord> select_cell(const std::vector<RunRecord>& records, int grid_index) {
  std::vector<RunRecord> out;
  for (const RunRecord& r : records)
    if (r.point.index == grid_index) out.push_back(r);
  return out;
}

Curve mean_curve(const std::vector<RunRecord>& records, bool metric) {
  Curve curve;
  std::vector<const RunRecord*> usable;
  for (const RunRecord& r : records)
    if (!r.failed() && !r.series.empty()) usable.push_back(&r);
  if (usable.empty()) return curve;
  std::size_t rows = usable.front()->series.size();
  for (const RunRecord* r : usable) rows = std::min(rows, r->series.size());
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> values;
    for (const RunRecord* r : usable)
      values.push_back(metric ? r->series[i].aliased_metric : r->series[i].J);
    const MeanSe m = mean_se(values);
    curve.steps.push_back(usable.front()->series[i].step);
    curve.mean.push_back(m.mean);
    curve.se.push_back(m.se);
  }
  return curve;
}

}  // namespace emphatic::harness
