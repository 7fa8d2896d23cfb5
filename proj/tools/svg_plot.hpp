#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace skycast::tools {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Bare-bones SVG line chart for the optional --plot output.
void write_line_plot(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<PlotSeries>& series);

/// Horizontal bar chart, one bar per label.
void write_bar_plot(const std::filesystem::path& path, const std::string& title, const std::vector<std::string>& labels,
                    const std::vector<double>& values);

}  // namespace skycast::tools
