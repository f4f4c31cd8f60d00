#pragma once

#include <string>
#include <vector>

namespace powvar {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;  // strictly positive values only (log axes)
};

/// Minimal self-contained log-log SVG: axes, decade ticks, polylines,
/// legend. Non-positive points are dropped.
std::string svgLogLogPlot(const std::vector<PlotSeries>& series,
                          const std::string& title, const std::string& xlabel,
                          const std::string& ylabel);

}  // namespace powvar
