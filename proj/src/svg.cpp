#include "huygens/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "huygens/errors.hpp"

namespace huygens::svg {

namespace {

constexpr double kWidth = 960;
constexpr double kPanelHeight = 280;
constexpr double kMarginLeft = 64;
constexpr double kMarginRight = 16;
constexpr double kMarginTop = 40;
constexpr double kPanelGap = 52;
constexpr double kMarginBottom = 48;
constexpr std::size_t kMaxPoints = 4000;

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void include(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void pad() {
        if (lo > hi) {
            lo = 0;
            hi = 1;
        }
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
            const double d = std::max(1e-12, std::abs(lo)) * 0.5;
            lo -= d;
            hi += d;
        } else {
            const double d = 0.05 * (hi - lo);
            lo -= d;
            hi += d;
        }
    }
};

// Tick positions at a 1/2/5 decade step, covering [lo, hi].
std::vector<double> ticks(double lo, double hi, int target = 5) {
    const double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / target)));
    const double ratio = span / (target * step);
    if (ratio >= 7.5)
        step *= 10;
    else if (ratio >= 3.5)
        step *= 5;
    else if (ratio >= 1.5)
        step *= 2;
    std::vector<double> out;
    for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + step * 1e-9;
         v += step) {
        out.push_back(std::abs(v) < step * 1e-6 ? 0.0 : v);
    }
    return out;
}

void render_panel(std::ostringstream& out, const Panel& panel, double top) {
    const double x0 = kMarginLeft;
    const double x1 = kWidth - kMarginRight;
    const double y0 = top;
    const double y1 = top + kPanelHeight;

    Range rx, ry;
    for (const Line& line : panel.lines) {
        if (line.x.size() != line.y.size())
            throw ShapeError("svg line has " + std::to_string(line.x.size()) +
                             " x values but " + std::to_string(line.y.size()) +
                             " y values");
        for (double v : line.x) rx.include(v);
        for (double v : line.y) ry.include(v);
    }
    rx.pad();
    ry.pad();
    const auto sx = [&](double v) {
        return x0 + (v - rx.lo) / (rx.hi - rx.lo) * (x1 - x0);
    };
    const auto sy = [&](double v) {
        return y1 - (v - ry.lo) / (ry.hi - ry.lo) * (y1 - y0);
    };

    out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\""
        << fmt(x1 - x0) << "\" height=\"" << fmt(y1 - y0)
        << "\" fill=\"white\" stroke=\"#333\"/>\n";

    for (double v : ticks(rx.lo, rx.hi)) {
        const double px = sx(v);
        out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(y0) << "\" x2=\""
            << fmt(px) << "\" y2=\"" << fmt(y1)
            << "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
        out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(y1 + 16)
            << "\" text-anchor=\"middle\">" << fmt(v, "%g") << "</text>\n";
    }
    for (double v : ticks(ry.lo, ry.hi)) {
        const double py = sy(v);
        out << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(py) << "\" x2=\""
            << fmt(x1) << "\" y2=\"" << fmt(py)
            << "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
        out << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(py + 4)
            << "\" text-anchor=\"end\">" << fmt(v, "%g") << "</text>\n";
    }

    for (const Line& line : panel.lines) {
        if (line.x.empty()) continue;
        const std::size_t n = line.x.size();
        const std::size_t stride = (n + kMaxPoints - 1) / kMaxPoints;
        out << "<polyline fill=\"none\" stroke=\"" << line.color
            << "\" stroke-width=\"" << fmt(line.width, "%g") << "\" points=\"";
        for (std::size_t i = 0; i < n; i += stride) {
            if (i) out << ' ';
            out << fmt(sx(line.x[i])) << ',' << fmt(sy(line.y[i]));
        }
        // keep the true endpoint so the curve does not stop short
        if ((n - 1) % stride != 0)
            out << ' ' << fmt(sx(line.x[n - 1])) << ','
                << fmt(sy(line.y[n - 1]));
        out << "\"/>\n";
    }

    if (!panel.label.empty())
        out << "<text x=\"" << fmt(x0 + 8) << "\" y=\"" << fmt(y0 + 18)
            << "\" font-weight=\"bold\">" << panel.label << "</text>\n";
    if (!panel.x_label.empty())
        out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\""
            << fmt(y1 + 34) << "\" text-anchor=\"middle\">" << panel.x_label
            << "</text>\n";
    if (!panel.y_label.empty())
        out << "<text x=\"" << fmt(x0 - 48) << "\" y=\""
            << fmt((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\""
            << "rotate(-90 " << fmt(x0 - 48) << ' ' << fmt((y0 + y1) / 2)
            << ")\">" << panel.y_label << "</text>\n";

    double lx = x1 - 10;
    for (auto it = panel.lines.rbegin(); it != panel.lines.rend(); ++it) {
        if (it->name.empty()) continue;
        const double ly = y0 + 16;
        const double text_w = 7.0 * static_cast<double>(it->name.size());
        lx -= text_w;
        out << "<text x=\"" << fmt(lx) << "\" y=\"" << fmt(ly + 4)
            << "\">" << it->name << "</text>\n";
        lx -= 22;
        out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << fmt(lx + 18) << "\" y2=\"" << fmt(ly) << "\" stroke=\""
            << it->color << "\" stroke-width=\"2\"/>\n";
        lx -= 14;
    }
}

}  // namespace

std::string render(const std::string& title,
                   const std::vector<Panel>& panels) {
    const double height =
        kMarginTop +
        static_cast<double>(panels.size()) * (kPanelHeight + kPanelGap) +
        kMarginBottom - kPanelGap;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << fmt(height, "%g") << "\" viewBox=\"0 0 "
        << kWidth << ' ' << fmt(height, "%g") << "\">\n";
    out << "<style>text{font-family:sans-serif;font-size:12px;fill:#333}"
           "</style>\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        out << "<text x=\"" << fmt(kWidth / 2)
            << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
            << "</text>\n";
    double top = kMarginTop;
    for (const Panel& panel : panels) {
        render_panel(out, panel, top);
        top += kPanelHeight + kPanelGap;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace huygens::svg
