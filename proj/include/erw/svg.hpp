#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "erw/accumulator.hpp"

namespace erw {

// Minimal static plots in the style of the usual density-overlay and
// scatter figures. Purely deterministic text output.
namespace svg {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Frame {
    double width = 640.0, height = 400.0;
    double left = 60.0, right = 20.0, top = 30.0, bottom = 45.0;
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    double px(double x) const {
        return left + (x - x0) / (x1 - x0) * (width - left - right);
    }
    double py(double y) const {
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom);
    }
};

inline void open_doc(std::ofstream& out, const Frame& f, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
        << f.height << "\" viewBox=\"0 0 " << f.width << " " << f.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << f.width / 2 << "\" y=\"18\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"13\">" << title << "</text>\n";
}

inline void axes(std::ofstream& out, const Frame& f, const std::string& xlabel,
                 const std::string& ylabel) {
    out << "<line x1=\"" << f.left << "\" y1=\"" << f.height - f.bottom << "\" x2=\""
        << f.width - f.right << "\" y2=\"" << f.height - f.bottom
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\""
        << f.height - f.bottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
        const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
        out << "<text x=\"" << num(f.px(x)) << "\" y=\"" << f.height - f.bottom + 16
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << num(x)
            << "</text>\n";
        out << "<text x=\"" << f.left - 6 << "\" y=\"" << num(f.py(y) + 3)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(y)
            << "</text>\n";
    }
    out << "<text x=\"" << (f.left + f.width - f.right) / 2 << "\" y=\"" << f.height - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xlabel
        << "</text>\n";
    out << "<text x=\"14\" y=\"" << (f.top + f.height - f.bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
        << "transform=\"rotate(-90 14 " << (f.top + f.height - f.bottom) / 2 << ")\">" << ylabel
        << "</text>\n";
}

}  // namespace svg

// Histogram of samples as a density bar chart with the centered normal
// density of the given variance overlaid.
inline void write_histogram_svg(const std::string& path, const MomentAccumulator& acc,
                                double overlay_sigma2, const std::string& title) {
    const auto& spec = acc.histogram_spec();
    const auto& counts = acc.histogram();
    if (spec.bins <= 0) throw std::invalid_argument("svg: accumulator has no histogram");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("svg: cannot open " + path);

    const double width = (spec.hi - spec.lo) / spec.bins;
    const double total = static_cast<double>(acc.count());
    double peak = 0.0;
    for (int b = 0; b < spec.bins; ++b)
        peak = std::max(peak, static_cast<double>(counts[b + 1]) / (total * width));
    const double sigma = std::sqrt(overlay_sigma2);
    peak = std::max(peak, 1.0 / (sigma * std::sqrt(2.0 * 3.14159265358979324)));

    svg::Frame f;
    f.x0 = spec.lo;
    f.x1 = spec.hi;
    f.y0 = 0.0;
    f.y1 = peak * 1.15;
    svg::open_doc(out, f, title);
    svg::axes(out, f, "statistic", "density");
    for (int b = 0; b < spec.bins; ++b) {
        const double dens = static_cast<double>(counts[b + 1]) / (total * width);
        if (dens <= 0.0) continue;
        const double x = spec.lo + b * width;
        out << "<rect x=\"" << svg::num(f.px(x)) << "\" y=\"" << svg::num(f.py(dens)) << "\" width=\""
            << svg::num(f.px(x + width) - f.px(x)) << "\" height=\""
            << svg::num(f.py(0) - f.py(dens)) << "\" fill=\"#9ecae1\" stroke=\"none\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i <= 200; ++i) {
        const double x = spec.lo + (spec.hi - spec.lo) * i / 200.0;
        const double dens =
            std::exp(-x * x / (2.0 * overlay_sigma2)) / (sigma * std::sqrt(2.0 * 3.14159265358979324));
        out << svg::num(f.px(x)) << ',' << svg::num(f.py(dens)) << ' ';
    }
    out << "\"/>\n</svg>\n";
    if (!out) throw std::runtime_error("svg: failed while writing " + path);
}

// Scatter plot of (x, y) points.
inline void write_scatter_svg(const std::string& path, const std::vector<double>& xs,
                              const std::vector<double>& ys, const std::string& title,
                              const std::string& xlabel, const std::string& ylabel) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("svg: scatter needs matching nonempty inputs");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("svg: cannot open " + path);
    svg::Frame f;
    const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
    const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
    const double xpad = (*xmax - *xmin) * 0.05 + 1e-12;
    const double ypad = (*ymax - *ymin) * 0.05 + 1e-12;
    f.x0 = *xmin - xpad;
    f.x1 = *xmax + xpad;
    f.y0 = *ymin - ypad;
    f.y1 = *ymax + ypad;
    svg::open_doc(out, f, title);
    svg::axes(out, f, xlabel, ylabel);
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << "<circle cx=\"" << svg::num(f.px(xs[i])) << "\" cy=\"" << svg::num(f.py(ys[i]))
            << "\" r=\"1.4\" fill=\"#3182bd\" fill-opacity=\"0.5\"/>\n";
    out << "</svg>\n";
    if (!out) throw std::runtime_error("svg: failed while writing " + path);
}

}  // namespace erw
