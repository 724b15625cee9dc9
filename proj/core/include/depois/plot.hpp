/// Static SVG line charts for sweep outputs. Text-only, deterministic files.
#pragma once

#include <string>
#include <vector>

namespace depois {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

void write_svg_line_chart(const std::string& path, const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace depois
