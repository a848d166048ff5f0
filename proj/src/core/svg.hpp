#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/sim.hpp"

namespace odb {

std::vector<SummaryRow> parse_summary_csv(const std::string& text);

// Regret-vs-parameter curves for a single experiment: one polyline per
// policy (colors assigned in sorted policy-name order), markers at each
// point, error bars where std > 0. Fixed canvas and fixed number
// formatting make the output byte-identical for identical input.
std::string render_plot_svg(const std::vector<SummaryRow>& rows);

// Splits rows by experiment (first-appearance order) and renders each;
// returns (experiment, svg) pairs. Empty input yields an empty vector.
std::vector<std::pair<std::string, std::string>> render_plots(
    const std::vector<SummaryRow>& rows);

}  // namespace odb
