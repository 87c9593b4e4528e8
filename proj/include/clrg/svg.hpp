#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "clrg/errors.hpp"

namespace clrg {

// Minimal self-contained SVG line chart; no external renderer or fonts
// beyond the generic sans-serif family.
struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<ChartSeries> series;
};

namespace detail {

inline std::string svg_num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

inline const char* chart_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[i % 8];
}

}  // namespace detail

inline std::string render_line_chart(const LineChart& chart) {
    const double width = 720, height = 480;
    const double left = 70, right = 160, top = 48, bottom = 56;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : chart.series)
        for (const auto& [x, y] : s.points) {
            if (chart.log_y && !(y > 0.0)) continue;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            const double yy = chart.log_y ? std::log10(y) : y;
            y_min = std::min(y_min, yy);
            y_max = std::max(y_max, yy);
        }
    if (!(x_min <= x_max) || !(y_min <= y_max))
        throw Error("render_line_chart: no plottable points");
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;

    auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) {
        const double yy = chart.log_y ? std::log10(y) : y;
        return top + (1.0 - (yy - y_min) / (y_max - y_min)) * plot_h;
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << chart.title << "</text>\n";

    // axes
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";

    const int ticks = 5;
    for (int t = 0; t <= ticks; ++t) {
        const double fx = x_min + (x_max - x_min) * t / ticks;
        const double gx = px(fx);
        out << "<line x1=\"" << gx << "\" y1=\"" << top + plot_h << "\" x2=\"" << gx
            << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << gx << "\" y=\"" << top + plot_h + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::svg_num(fx) << "</text>\n";
        const double fy = y_min + (y_max - y_min) * t / ticks;
        const double gy = top + (1.0 - static_cast<double>(t) / ticks) * plot_h;
        const double label = chart.log_y ? std::pow(10.0, fy) : fy;
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << gy << "\" x2=\"" << left << "\" y2=\""
            << gy << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << left - 8 << "\" y=\"" << gy + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::svg_num(label) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << chart.x_label << "</text>\n"
        << "<text x=\"18\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << top + plot_h / 2 << ")\">"
        << (chart.log_y ? chart.y_label + " (log scale)" : chart.y_label) << "</text>\n";

    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const char* color = detail::chart_color(s);
        std::ostringstream pts;
        for (const auto& [x, y] : chart.series[s].points) {
            if (chart.log_y && !(y > 0.0)) continue;
            pts << detail::svg_num(px(x)) << "," << detail::svg_num(py(y)) << " ";
        }
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
            << pts.str() << "\"/>\n";
        for (const auto& [x, y] : chart.series[s].points) {
            if (chart.log_y && !(y > 0.0)) continue;
            out << "<circle cx=\"" << detail::svg_num(px(x)) << "\" cy=\""
                << detail::svg_num(py(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        const double ly = top + 16 + 18.0 * static_cast<double>(s);
        out << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\""
            << left + plot_w + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << chart.series[s].label
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

inline void write_line_chart(const std::string& path, const LineChart& chart) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << render_line_chart(chart);
}

}  // namespace clrg
