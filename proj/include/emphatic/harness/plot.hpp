#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emphatic/harness/results.hpp"

namespace emphatic::harness {

enum class PlotKind { Curves, Sensitivity, ActionProb };

PlotKind parse_plot_kind(const std::string& name);

// Renders one SVG 1.1 document. Curves and action-prob plots draw, per result
// set and lambda_a, the best-stepsize mean with a standard-error band; the
// sensitivity plot draws final J against stepsize. Throws MixedMetricError when
// the sets come from different environments and EmptyInput when there is
// nothing to draw.
std::string render_plot(const std::vector<ResultSet>& sets, PlotKind kind,
                        std::optional<double> optimum = std::nullopt);

/// Aliased optimum for tabular envs, nullopt for continuous ones.
std::optional<double> plot_optimum(const std::string& env);

void write_plot(const std::vector<ResultSet>& sets, PlotKind kind,
                const std::filesystem::path& out);

}  // namespace emphatic::harness
