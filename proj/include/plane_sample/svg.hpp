#pragma once

#include <string>
#include <vector>

namespace ps::svg {

// Minimal deterministic SVG line plots: fixed 800x500 viewport, coordinates
// printed with fixed precision so re-renders of identical data are
// byte-identical.
struct Series {
    std::string label;
    std::string color;
    std::vector<double> x, y;
};

struct Band {
    std::string color;
    std::vector<double> x, lo, hi;
};

struct VLine {
    double x = 0.0;
    std::string color;
    std::string label;
};

struct Plot {
    std::string title, x_label, y_label;
    std::vector<Band> bands;
    std::vector<Series> series;
    std::vector<VLine> vlines;

    std::string render() const;
};

}  // namespace ps::svg
