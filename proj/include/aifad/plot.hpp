#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "aifad/harness.hpp"

namespace aifad {

enum class Metric { kSuccess, kStoppingTime, kProbes };

/// `success`, `stopping_time` or `probes`; ConfigError otherwise.
Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric);

/// One SVG panel for the rows with the given lambda: x = pi_upper, one line
/// per (agent, rho), error bars of one standard error. Throws EmptyInput if
/// no row matches.
std::string render_metric_svg(const std::vector<MetricsRow>& rows, Metric metric, double lambda);

/// Writes `<metric>_lambda_<value>.svg` for every lambda in `rows` into
/// `out_dir` and returns the paths in ascending lambda order.
std::vector<std::filesystem::path> emit_plots(const std::vector<MetricsRow>& rows, Metric metric,
                                              const std::filesystem::path& out_dir);

}  // namespace aifad
