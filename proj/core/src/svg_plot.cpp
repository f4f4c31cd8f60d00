#include "powvar/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace powvar {

namespace {

const char* kColors[] = {"#1f6fb2", "#d0662c", "#3d8f4e", "#9040a0",
                         "#c03050", "#707070"};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string svgLogLogPlot(const std::vector<PlotSeries>& series,
                          const std::string& title, const std::string& xlabel,
                          const std::string& ylabel) {
    const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 55;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0 && s.y[i] > 0.0)) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!(xmax > 0.0)) { xmin = 0.1; xmax = 1.0; ymin = 0.1; ymax = 1.0; }
    double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
    double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
    if (lx1 - lx0 < 1e-9) { lx0 -= 0.5; lx1 += 0.5; }
    if (ly1 - ly0 < 1e-9) { ly0 -= 0.5; ly1 += 0.5; }
    double padx = 0.03 * (lx1 - lx0), pady = 0.05 * (ly1 - ly0);
    lx0 -= padx; lx1 += padx; ly0 -= pady; ly1 += pady;

    auto X = [&](double v) {
        return ml + (std::log10(v) - lx0) / (lx1 - lx0) * (W - ml - mr);
    };
    auto Y = [&](double v) {
        return H - mb - (std::log10(v) - ly0) / (ly1 - ly0) * (H - mt - mb);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W) +
           "\" height=\"" + fmt(H) + "\" viewBox=\"0 0 " + fmt(W) + " " + fmt(H) +
           "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(W / 2) + "\" y=\"22\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";

    // Frame.
    svg += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" +
           fmt(W - ml - mr) + "\" height=\"" + fmt(H - mt - mb) +
           "\" fill=\"none\" stroke=\"#404040\"/>\n";

    // Decade ticks.
    for (int d = (int)std::ceil(lx0); d <= (int)std::floor(lx1); ++d) {
        double v = std::pow(10.0, d);
        svg += "<line x1=\"" + fmt(X(v)) + "\" y1=\"" + fmt(H - mb) + "\" x2=\"" +
               fmt(X(v)) + "\" y2=\"" + fmt(mt) +
               "\" stroke=\"#d8d8d8\" stroke-dasharray=\"3,3\"/>\n";
        svg += "<text x=\"" + fmt(X(v)) + "\" y=\"" + fmt(H - mb + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">1e" + std::to_string(d) + "</text>\n";
    }
    for (int d = (int)std::ceil(ly0); d <= (int)std::floor(ly1); ++d) {
        double v = std::pow(10.0, d);
        svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(Y(v)) + "\" x2=\"" +
               fmt(W - mr) + "\" y2=\"" + fmt(Y(v)) +
               "\" stroke=\"#d8d8d8\" stroke-dasharray=\"3,3\"/>\n";
        svg += "<text x=\"" + fmt(ml - 6) + "\" y=\"" + fmt(Y(v) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"11\">1e" + std::to_string(d) + "</text>\n";
    }

    svg += "<text x=\"" + fmt(W / 2) + "\" y=\"" + fmt(H - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">" + xlabel + "</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt(H / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 16 " + fmt(H / 2) + ")\">" + ylabel +
           "</text>\n";

    int ci = 0;
    double ly = mt + 14;
    for (const auto& s : series) {
        const char* color = kColors[ci % 6];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0 && s.y[i] > 0.0)) continue;
            pts += fmt(X(s.x[i])) + "," + fmt(Y(s.y[i])) + " ";
            svg += "<circle cx=\"" + fmt(X(s.x[i])) + "\" cy=\"" +
                   fmt(Y(s.y[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        svg += "<text x=\"" + fmt(ml + 10) + "\" y=\"" + fmt(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color +
               "\">" + s.name + "</text>\n";
        ly += 16;
        ++ci;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace powvar
