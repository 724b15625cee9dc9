#include "depois/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace depois {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

void write_svg_line_chart(const std::string& path, const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series) {
    const double width = 640, height = 420;
    const double ml = 70, mr = 140, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
    }
    if (ymin > ymax) {
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double v) { return mt + ph - (v - ymin) / (ymax - ymin) * ph; };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_svg_line_chart: cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
        << "</text>\n";

    // Axes and ticks.
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 5.0;
        const double fy = ymin + (ymax - ymin) * t / 5.0;
        out << "<text x=\"" << sx(fx) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\">" << fmt(fx) << "</text>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">" << fmt(fy)
            << "</text>\n";
        out << "<line x1=\"" << ml << "\" y1=\"" << sy(fy) << "\" x2=\"" << ml + pw << "\" y2=\"" << sy(fy)
            << "\" stroke=\"#dddddd\"/>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">" << x_label
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << mt + ph / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i)
            out << sx(series[s].x[i]) << ',' << sy(series[s].y[i]) << ' ';
        out << "\"/>\n";
        for (std::size_t i = 0; i < series[s].x.size(); ++i)
            out << "<circle cx=\"" << sx(series[s].x[i]) << "\" cy=\"" << sy(series[s].y[i])
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(s);
        out << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + pw + 30
            << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << ml + pw + 36 << "\" y=\"" << ly << "\">" << series[s].name << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace depois
