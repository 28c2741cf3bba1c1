#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pshrink::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static SVG 1.1 line chart: axes with ticks, one polyline per series, an
/// optional dashed horizontal reference line, and a legend.
struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::optional<double> reference_y;
    std::string reference_label;
    int width = 640;
    int height = 420;

    std::string render() const;
};

/// Roughly `target` evenly spaced round tick values covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

std::string escape_xml(const std::string& s);

}  // namespace pshrink::svg
