#pragma once

#include <string>
#include <vector>

namespace huygens::svg {

struct Line {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    double width = 1.0;
    std::string name;  // legend entry; empty = no legend
};

struct Panel {
    std::string label;    // drawn top-left inside the frame, e.g. "(a)"
    std::string x_label;  // drawn under the x axis
    std::string y_label;  // drawn beside the y axis
    std::vector<Line> lines;
};

// Self-contained SVG document with the panels stacked vertically, shared
// width, independent axes with auto ticks. Long series are thinned by a
// uniform stride to at most 4000 points per polyline. Output depends only
// on the inputs, so identical calls give byte-identical documents.
std::string render(const std::string& title, const std::vector<Panel>& panels);

}  // namespace huygens::svg
