#include "emphatic/harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "emphatic/envs.hpp"
#include "emphatic/errors.hpp"
#include "emphatic/harness/report.hpp"

namespace emphatic::harness {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 200.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 55.0;

const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> se;
  bool band = false;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string actor_label(const ExperimentConfig& c, double lambda_a) {
  char buf[64];
  switch (c.actor) {
    case ActorKind::TrueAce:
      return "True-ACE";
    case ActorKind::Dpg:
      return "DPG";
    case ActorKind::TrueDpge:
      return "True-DPGE";
    case ActorKind::Ace:
      break;
  }
  std::snprintf(buf, sizeof buf, "ACE(%g)", lambda_a);
  std::string label = buf;
  if (c.critic == CriticKind::Gtd) label += " GTD";
  return label;
}

// Evenly spaced round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * step; t += step)
    out.push_back(t);
  return out;
}

class Frame {
 public:
  Frame(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (x1_ <= x0_) x1_ = x0_ + 1.0;
    if (y1_ <= y0_) {
      y0_ -= 0.5;
      y1_ += 0.5;
    }
  }
  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom);
  }
  double x0() const { return x0_; }
  double x1() const { return x1_; }
  double y0() const { return y0_; }
  double y1() const { return y1_; }

 private:
  double x0_, x1_, y0_, y1_;
};

std::string render(const std::vector<Series>& series, const std::string& x_label,
                   const std::string& y_label, bool log_x, std::optional<double> optimum,
                   bool markers) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i] - s.se[i]);
      y1 = std::max(y1, s.y[i] + s.se[i]);
    }
  if (optimum) {
    y0 = std::min(y0, *optimum);
    y1 = std::max(y1, *optimum);
  }
  const double pad = 0.05 * std::max(y1 - y0, 1e-6);
  Frame f(x0, x1, y0 - pad, y1 + pad);

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
         "\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" fill=\"white\"/>\n";

  // axes and ticks
  const double left = f.px(f.x0()), right = f.px(f.x1());
  const double bottom = f.py(f.y0()), top = f.py(f.y1());
  svg += "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  svg += "<path d=\"M" + num(left) + " " + num(top) + " L" + num(left) + " " + num(bottom) +
         " L" + num(right) + " " + num(bottom) + "\"/>\n</g>\n";
  svg += "<g fill=\"black\">\n";
  for (double t : ticks(f.x0(), f.x1())) {
    const double x = f.px(t);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(bottom + 5) + "\" stroke=\"black\"/>\n";
    const std::string label = log_x ? "1e" + tick_label(t) : tick_label(t);
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(bottom + 18) + "\" text-anchor=\"middle\">" +
           label + "</text>\n";
  }
  for (double t : ticks(f.y0(), f.y1())) {
    const double y = f.py(t);
    svg += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" +
           tick_label(t) + "</text>\n";
  }
  svg += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\">" + x_label + "</text>\n";
  svg += "<text transform=\"translate(16 " + num((top + bottom) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + y_label + "</text>\n";
  svg += "</g>\n";

  if (optimum) {
    const double y = f.py(*optimum);
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(right) + "\" y2=\"" +
           num(y) + "\" stroke=\"black\" stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n";
  }

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* colour = kColours[k % (sizeof kColours / sizeof *kColours)];
    if (s.band && s.x.size() > 1) {
      std::string d = "M";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        d += (i ? " L" : "") + num(f.px(s.x[i])) + " " + num(f.py(s.y[i] + s.se[i]));
      for (std::size_t i = s.x.size(); i-- > 0;)
        d += " L" + num(f.px(s.x[i])) + " " + num(f.py(s.y[i] - s.se[i]));
      svg += "<path d=\"" + d + " Z\" fill=\"" + colour +
             "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string d = "M";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      d += (i ? " L" : "") + num(f.px(s.x[i])) + " " + num(f.py(s.y[i]));
    svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\"/>\n";
    if (markers)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double x = f.px(s.x[i]);
        svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(f.py(s.y[i])) + "\" r=\"2.5\" fill=\"" +
               colour + "\"/>\n";
        if (s.band)
          svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(f.py(s.y[i] - s.se[i])) + "\" x2=\"" +
                 num(x) + "\" y2=\"" + num(f.py(s.y[i] + s.se[i])) + "\" stroke=\"" + colour +
                 "\"/>\n";
      }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    svg += "<line x1=\"" + num(kWidth - kRight + 15) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kWidth - kRight + 40) + "\" y2=\"" + num(ly) + "\" stroke=\"" + colour +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kWidth - kRight + 46) + "\" y=\"" + num(ly + 4) + "\">" + s.label +
           "</text>\n";
  }
  if (optimum) {
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(series.size());
    svg += "<line x1=\"" + num(kWidth - kRight + 15) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kWidth - kRight + 40) + "\" y2=\"" + num(ly) +
           "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
    svg += "<text x=\"" + num(kWidth - kRight + 46) + "\" y=\"" + num(ly + 4) + "\">optimum</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "curves") return PlotKind::Curves;
  if (name == "sensitivity") return PlotKind::Sensitivity;
  if (name == "action-prob") return PlotKind::ActionProb;
  throw ConfigInvalid("plot kind must be one of {curves, sensitivity, action-prob}, got '" + name +
                      "'");
}

std::optional<double> plot_optimum(const std::string& env) {
  if (is_continuous_env(env)) return std::nullopt;
  return aliased_optimum(make_discrete_env(env));
}

std::string render_plot(const std::vector<ResultSet>& sets, PlotKind kind,
                        std::optional<double> optimum) {
  if (sets.empty()) throw EmptyInput("nothing to plot");
  for (const ResultSet& s : sets)
    if (s.config.env != sets.front().config.env)
      throw MixedMetricError("result sets mix environments '" + sets.front().config.env +
                             "' and '" + s.config.env + "'");
  const bool continuous = is_continuous_env(sets.front().config.env);

  std::vector<Series> series;
  for (const ResultSet& set : sets) {
    if (set.records.empty()) continue;
    const SweepReport report = sweep_report(set.records);
    for (const BestChoice& best : report.best) {
      if (kind == PlotKind::Sensitivity) {
        Series s;
        s.label = actor_label(set.config, best.lambda_a);
        for (const SweepCell& c : report.cells) {
          if (c.point.lambda_a != best.lambda_a || c.final_J.n == 0) continue;
          s.x.push_back(std::log10(c.point.alpha));
          s.y.push_back(c.final_J.mean);
          s.se.push_back(c.final_J.se);
          s.band = s.band || c.final_J.n > 1;
        }
        if (!s.x.empty()) series.push_back(std::move(s));
        continue;
      }
      if (best.cell < 0) continue;
      const SweepCell& cell = report.cells[static_cast<std::size_t>(best.cell)];
      const Curve curve =
          mean_curve(select_cell(set.records, cell.point.index), kind == PlotKind::ActionProb);
      Series s;
      char buf[48];
      std::snprintf(buf, sizeof buf, " a=%g", cell.point.alpha);
      s.label = actor_label(set.config, best.lambda_a) + buf;
      for (std::size_t i = 0; i < curve.steps.size(); ++i) {
        s.x.push_back(static_cast<double>(curve.steps[i]));
        s.y.push_back(curve.mean[i]);
        s.se.push_back(curve.se[i]);
      }
      s.band = cell.final_J.n > 1;
      if (!s.x.empty()) series.push_back(std::move(s));
    }
  }
  if (series.empty()) throw EmptyInput("no completed runs to plot");

  switch (kind) {
    case PlotKind::Curves:
      return render(series, "updates", "objective J", false, optimum, false);
    case PlotKind::ActionProb:
      return render(series, "updates",
                    continuous ? "mean action (aliased states)" : "P(A0 | aliased states)", false,
                    std::nullopt, false);
    case PlotKind::Sensitivity:
      return render(series, "actor stepsize", "final objective J", true, optimum, true);
  }
  return {};
}

void write_plot(const std::vector<ResultSet>& sets, PlotKind kind, const std::filesystem::path& out) {
  const std::optional<double> optimum =
      (kind == PlotKind::ActionProb || sets.empty()) ? std::nullopt
                                                     : plot_optimum(sets.front().config.env);
  const std::string svg = render_plot(sets, kind, optimum);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw ConfigInvalid("cannot write '" + out.string() + "'");
  file << svg;
}

}  // namespace emphatic::harness
