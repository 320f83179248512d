#pragma once

#include <string>
#include <vector>

namespace cmokg {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> ci;  // empty when the input has no usable CI column
};

struct ParsedAggregate {
  std::vector<PlotSeries> series;
  std::vector<std::string> warnings;
};

/// Parse an aggregate CSV (mode,checkpoint_cost,mean_regret,ci95_halfwidth,n_runs).
ParsedAggregate parse_aggregate_csv(const std::string& text);

/// Regret-versus-cost figure: one line per series, shaded 95% band where CI
/// data exists. Output bytes are a pure function of the input.
std::string render_regret_svg(const std::vector<PlotSeries>& series);

}  // namespace cmokg
