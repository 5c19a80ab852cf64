#include "plane_sample/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ps::svg {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 64, kRight = 776, kTop = 46, kBottom = 452;

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), format, a, b, c, d);
    return buf;
}

struct Range {
    double lo = 0.0, hi = 1.0;
    void include(double v) {
        if (!std::isfinite(v)) return;
        if (empty) {
            lo = hi = v;
            empty = false;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void finish() {
        if (empty) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 1.0;
            hi += 1.0;
        }
    }
    bool empty = true;
};

}  // namespace

std::string Plot::render() const {
    Range rx, ry;
    ry.include(0.0);
    for (const Band& b : bands)
        for (std::size_t i = 0; i < b.x.size(); ++i) {
            rx.include(b.x[i]);
            ry.include(b.lo[i]);
            ry.include(b.hi[i]);
        }
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            rx.include(s.x[i]);
            ry.include(s.y[i]);
        }
    for (const VLine& v : vlines) rx.include(v.x);
    rx.finish();
    ry.finish();

    const auto px = [&](double x) {
        return kLeft + (x - rx.lo) / (rx.hi - rx.lo) * (kRight - kLeft);
    };
    const auto py = [&](double y) {
        return kBottom - (y - ry.lo) / (ry.hi - ry.lo) * (kBottom - kTop);
    };

    std::string out;
    out += fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
               "viewBox=\"0 0 %.0f %.0f\">\n",
               kWidth, kHeight, kWidth, kHeight);
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"16\">" + title + "</text>\n";

    // axes and ticks
    out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
               kLeft, kBottom, kRight, kBottom);
    out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
               kLeft, kBottom, kLeft, kTop);
    for (int i = 0; i <= 4; ++i) {
        const double tx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double ty = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                   px(tx), kBottom, px(tx), kBottom + 5);
        out += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
                   "font-family=\"sans-serif\" font-size=\"11\">",
                   px(tx), kBottom + 18) +
               fmt("%.2f", tx) + "</text>\n";
        out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                   kLeft - 5, py(ty), kLeft, py(ty));
        out += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" "
                   "font-family=\"sans-serif\" font-size=\"11\">",
                   kLeft - 8, py(ty) + 4) +
               fmt("%.2f", ty) + "</text>\n";
    }
    if (!x_label.empty())
        out += "<text x=\"420\" y=\"488\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"13\">" + x_label + "</text>\n";
    if (!y_label.empty())
        out += "<text x=\"16\" y=\"250\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"13\" transform=\"rotate(-90 16 250)\">" + y_label + "</text>\n";

    for (const Band& b : bands) {
        if (b.x.empty()) continue;
        std::string pts;
        for (std::size_t i = 0; i < b.x.size(); ++i)
            pts += fmt("%.2f,%.2f ", px(b.x[i]), py(b.hi[i]));
        for (std::size_t i = b.x.size(); i > 0; --i)
            pts += fmt("%.2f,%.2f ", px(b.x[i - 1]), py(b.lo[i - 1]));
        out += "<polygon points=\"" + pts + "\" fill=\"" + b.color +
               "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    }
    for (const Series& s : series) {
        if (s.x.empty()) continue;
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts += fmt("%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + s.color +
               "\" stroke-width=\"2\"/>\n";
    }
    for (const VLine& v : vlines) {
        out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"",
                   px(v.x), kBottom, px(v.x), kTop) +
               v.color + "\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>\n";
        if (!v.label.empty())
            out += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
                       "font-family=\"sans-serif\" font-size=\"11\">",
                       px(v.x), kTop - 6) +
                   v.label + "</text>\n";
    }

    double ly = kTop + 14;
    for (const Series& s : series) {
        if (s.label.empty()) continue;
        out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"",
                   kRight - 150, ly - 4, kRight - 122, ly - 4) +
               s.color + "\" stroke-width=\"2\"/>\n";
        out += fmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\">",
                   kRight - 114, ly) +
               s.label + "</text>\n";
        ly += 18;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace ps::svg
