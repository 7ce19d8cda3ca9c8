// Minimal standalone SVG line plots. CSV traces stay the ground truth;
// these are derived artifacts for eyeballing runs.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dropt {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

void write_line_plot(std::ostream& out, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series);

} // namespace dropt
