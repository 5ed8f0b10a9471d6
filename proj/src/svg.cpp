#include "svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace slideeval::svg {

namespace {

constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 170, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string f(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
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

std::string header(double w, double h, const std::string& title) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(w) + "\" height=\"" + f(h) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
           "<text x=\"" + f(w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); }
    double py(double y) const { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); }
};

std::string axes(const Frame& fr, const std::string& xl, const std::string& yl) {
    std::string s;
    s += "<line x1=\"" + f(kLeft) + "\" y1=\"" + f(kH - kBottom) + "\" x2=\"" + f(kW - kRight) + "\" y2=\"" +
         f(kH - kBottom) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + f(kLeft) + "\" y1=\"" + f(kTop) + "\" x2=\"" + f(kLeft) + "\" y2=\"" + f(kH - kBottom) +
         "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double yv = fr.y0 + (fr.y1 - fr.y0) * i / 4.0, xv = fr.x0 + (fr.x1 - fr.x0) * i / 4.0;
        s += "<text x=\"" + f(kLeft - 6) + "\" y=\"" + f(fr.py(yv) + 4) + "\" text-anchor=\"end\">" + f(yv) + "</text>\n";
        s += "<text x=\"" + f(fr.px(xv)) + "\" y=\"" + f(kH - kBottom + 16) + "\" text-anchor=\"middle\">" + f(xv) +
             "</text>\n";
    }
    s += "<text x=\"" + f((kLeft + kW - kRight) / 2) + "\" y=\"" + f(kH - 10) + "\" text-anchor=\"middle\">" +
         escape(xl) + "</text>\n";
    s += "<text x=\"16\" y=\"" + f((kTop + kH - kBottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         f((kTop + kH - kBottom) / 2) + ")\">" + escape(yl) + "</text>\n";
    return s;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, std::pair<double, double> y_range) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            x0 = std::min(x0, p.first);
            x1 = std::max(x1, p.first);
        }
    }
    if (!(x0 < x1)) {
        x0 = x0 == std::numeric_limits<double>::infinity() ? 0.0 : x0 - 0.5;
        x1 = x0 + 1.0;
    }
    const Frame fr{x0, x1, y_range.first, y_range.second};
    std::string s = header(kW, kH, title) + axes(fr, x_label, y_label);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % std::size(kPalette)];
        std::string pts;
        for (const auto& p : series[i].points) pts += f(fr.px(p.first)) + "," + f(fr.py(p.second)) + " ";
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        const double ly = kTop + 16.0 * static_cast<double>(i);
        s += "<rect x=\"" + f(kW - kRight + 10) + "\" y=\"" + f(ly) + "\" width=\"10\" height=\"10\" fill=\"" + color +
             "\"/>\n<text x=\"" + f(kW - kRight + 24) + "\" y=\"" + f(ly + 9) + "\">" + escape(series[i].label) +
             "</text>\n";
    }
    return s + "</svg>\n";
}

std::string bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars,
                      std::pair<double, double> y_range) {
    const Frame fr{0.0, static_cast<double>(std::max<std::size_t>(bars.size(), 1)), y_range.first, y_range.second};
    std::string s = header(kW, kH, title);
    s += "<line x1=\"" + f(kLeft) + "\" y1=\"" + f(fr.py(0)) + "\" x2=\"" + f(kW - kRight) + "\" y2=\"" + f(fr.py(0)) +
         "\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double v = std::clamp(bars[i].second, y_range.first, y_range.second);
        const double xl = fr.px(i + 0.15), xr = fr.px(i + 0.85);
        const double top = std::min(fr.py(v), fr.py(0)), bottom = std::max(fr.py(v), fr.py(0));
        s += "<rect x=\"" + f(xl) + "\" y=\"" + f(top) + "\" width=\"" + f(xr - xl) + "\" height=\"" + f(bottom - top) +
             "\" fill=\"" + kPalette[i % std::size(kPalette)] + "\"/>\n";
        s += "<text x=\"" + f((xl + xr) / 2) + "\" y=\"" + f(kH - kBottom + 16) + "\" text-anchor=\"middle\">" +
             escape(bars[i].first) + "</text>\n";
        s += "<text x=\"" + f((xl + xr) / 2) + "\" y=\"" + f(top - 4) + "\" text-anchor=\"middle\">" + f(bars[i].second) +
             "</text>\n";
    }
    return s + "</svg>\n";
}

std::string heatmap(const std::string& title, const std::vector<std::string>& labels,
                    const std::vector<std::vector<std::optional<double>>>& cells) {
    const double cell = 60, left = 140, top = 50;
    const double w = left + cell * static_cast<double>(labels.size()) + 20;
    const double h = top + cell * static_cast<double>(labels.size()) + 20;
    std::string s = header(std::max(w, 300.0), h, title);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        s += "<text x=\"" + f(left - 6) + "\" y=\"" + f(top + cell * (i + 0.5) + 4) + "\" text-anchor=\"end\">" +
             escape(labels[i]) + "</text>\n";
        for (std::size_t j = 0; j < labels.size(); ++j) {
            std::string fill = "#cccccc", text = "n/a";
            if (const auto& v = cells[i][j]) {
                const double t = std::clamp(*v, -1.0, 1.0);
                const int r = t < 0 ? 255 : static_cast<int>(255 * (1 - t));
                const int b = t > 0 ? 255 : static_cast<int>(255 * (1 + t));
                const int g = static_cast<int>(255 * (1 - std::abs(t)));
                char buf[8];
                std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
                fill = buf;
                text = f(*v);
            }
            s += "<rect x=\"" + f(left + cell * j) + "\" y=\"" + f(top + cell * i) + "\" width=\"" + f(cell) +
                 "\" height=\"" + f(cell) + "\" fill=\"" + fill + "\" stroke=\"white\"/>\n";
            s += "<text x=\"" + f(left + cell * (j + 0.5)) + "\" y=\"" + f(top + cell * (i + 0.5) + 4) +
                 "\" text-anchor=\"middle\">" + text + "</text>\n";
        }
    }
    return s + "</svg>\n";
}

}  // namespace slideeval::svg
