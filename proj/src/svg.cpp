#include "pshrink/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pshrink/error.h"

namespace pshrink::svg {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

}  // namespace

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo)) hi = lo + 1.0;
    const double raw = (hi - lo) / std::max(1, target);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    const double step = (frac <= 1.0 ? 1.0 : frac <= 2.0 ? 2.0 : frac <= 5.0 ? 5.0 : 10.0) * mag;
    std::vector<double> ticks;
    for (double t = std::floor(lo / step) * step; t <= hi + 0.5 * step; t += step) {
        ticks.push_back(t);
    }
    return ticks;
}

std::string LineChart::render() const {
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const Series& s : series) {
        if (s.x.size() != s.y.size()) {
            throw Error(ErrorKind::DimensionMismatch, "LineChart: series '" + s.label +
                                                          "' has mismatched x and y lengths");
        }
        for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
        for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    }
    if (reference_y) ymin = std::min(ymin, *reference_y), ymax = std::max(ymax, *reference_y);
    if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
    if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
    ymin = std::min(ymin, 0.0);

    const std::vector<double> xt = nice_ticks(xmin, xmax);
    const std::vector<double> yt = nice_ticks(ymin, ymax);
    const double x0 = xt.front(), x1 = std::max(xt.back(), xmax);
    const double y0 = yt.front(), y1 = std::max(yt.back(), ymax);

    const double left = 70, right = 170, top = 40, bottom = 55;
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + ph - (v - y0) / (y1 - y0) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(title) << "</text>\n";

    // Grid and ticks.
    o << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (double t : xt) {
        if (t < x0 - 1e-12 || t > x1 + 1e-12) continue;
        o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(t))
          << "\" y2=\"" << num(top + ph) << "\" stroke=\"#eee\"/>\n"
          << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 16)
          << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    for (double t : yt) {
        if (t < y0 - 1e-12 || t > y1 + 1e-12) continue;
        o << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(t)) << "\" x2=\""
          << num(left + pw) << "\" y2=\"" << num(py(t)) << "\" stroke=\"#eee\"/>\n"
          << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t) + 4)
          << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
    }
    o << "</g>\n";

    // Axes and labels.
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n"
      << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 14.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape_xml(x_label) << "</text>\n"
      << "<text transform=\"translate(18," << num(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape_xml(y_label) << "</text>\n";

    if (reference_y) {
        o << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(*reference_y)) << "\" x2=\""
          << num(left + pw) << "\" y2=\"" << num(py(*reference_y))
          << "\" stroke=\"#555\" stroke-width=\"1.2\" stroke-dasharray=\"6,4\"/>\n";
    }

    for (std::size_t i = 0; i < series.size(); ++i) {
        const Series& s = series[i];
        o << "<polyline fill=\"none\" stroke=\"" << kPalette[i % std::size(kPalette)]
          << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            o << (k ? " " : "") << num(px(s.x[k])) << ',' << num(py(s.y[k]));
        }
        o << "\"/>\n";
    }

    // Legend.
    double ly = top + 10;
    const double lx = left + pw + 15;
    o << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t i = 0; i < series.size(); ++i, ly += 18) {
        o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 22)
          << "\" y2=\"" << num(ly) << "\" stroke=\"" << kPalette[i % std::size(kPalette)]
          << "\" stroke-width=\"2\"/>\n"
          << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\">"
          << escape_xml(series[i].label) << "</text>\n";
    }
    if (reference_y) {
        o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 22)
          << "\" y2=\"" << num(ly) << "\" stroke=\"#555\" stroke-dasharray=\"6,4\"/>\n"
          << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\">"
          << escape_xml(reference_label) << "</text>\n";
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

}  // namespace pshrink::svg
