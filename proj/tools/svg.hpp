#pragma once

#include <string>
#include <vector>

namespace conetrack::plot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct BoxData {
    std::string label;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

std::string box_chart(const std::string& title, const std::string& y_label, const std::vector<BoxData>& boxes);

/// Cell (i, j) is drawn at row i (y axis) and column j (x axis); values are expected in [0, 1].
std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, const std::vector<std::vector<double>>& values,
                    const std::string& row_axis, const std::string& col_axis);

} // namespace conetrack::plot
