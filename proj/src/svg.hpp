#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace slideeval::svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, std::pair<double, double> y_range);

std::string bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars,
                      std::pair<double, double> y_range);

/// Square matrix of values in [-1, 1]; missing cells are grey.
std::string heatmap(const std::string& title, const std::vector<std::string>& labels,
                    const std::vector<std::vector<std::optional<double>>>& cells);

}  // namespace slideeval::svg
