#pragma once

#include <string>
#include <vector>

#include "corpusmix/analysis.hpp"

namespace corpusmix::svg {

// Static SVG renderings of the JSON reports.
std::string heatmap(const OverlapMatrix& matrix, const std::string& title = "Cluster overlap (%)");
std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values);

}  // namespace corpusmix::svg
