#include "dropt/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "dropt/util.hpp"

namespace dropt {

namespace {

const char* kPalette[] = {"#c62828", "#1565c0", "#2e7d32", "#ef6c00",
                          "#6a1b9a", "#00838f", "#4e342e", "#37474f"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (lo == hi) {
            lo -= 1.0;
            hi += 1.0;
        } else {
            const double m = 0.05 * (hi - lo);
            lo -= m;
            hi += m;
        }
    }
};

} // namespace

void write_line_plot(std::ostream& out, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series) {
    if (series.empty())
        throw std::invalid_argument("plot requires at least one series");
    Range xr, yr;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty())
            throw std::invalid_argument("plot series must be non-empty and aligned");
        for (double v : s.x) xr.include(v);
        for (double v : s.y) yr.include(v);
    }
    xr.pad();
    yr.pad();

    const double width = 860, height = 520;
    const double ml = 70, mr = 170, mt = 45, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;
    const auto sx = [&](double v) { return ml + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto sy = [&](double v) { return mt + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
        << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // Axes with 5 ticks each.
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xr.lo + k * (xr.hi - xr.lo) / 5;
        const double yv = yr.lo + k * (yr.hi - yr.lo) / 5;
        out << "<line x1=\"" << sx(xv) << "\" y1=\"" << mt << "\" x2=\"" << sx(xv)
            << "\" y2=\"" << mt + ph << "\" stroke=\"#ddd\"/>\n"
            << "<text x=\"" << sx(xv) << "\" y=\"" << mt + ph + 16
            << "\" text-anchor=\"middle\">" << format_double(std::round(xv * 100) / 100)
            << "</text>\n"
            << "<line x1=\"" << ml << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml + pw
            << "\" y2=\"" << sy(yv) << "\" stroke=\"#ddd\"/>\n"
            << "<text x=\"" << ml - 6 << "\" y=\"" << sy(yv) + 4
            << "\" text-anchor=\"end\">" << format_double(std::round(yv * 1000) / 1000)
            << "</text>\n";
    }
    out << "</g>\n"
        << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
        << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n"
        << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << x_label << "</text>\n"
        << "<text x=\"18\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << y_label
        << "</text>\n";

    const std::size_t legend_cap = 10;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < series[s].x.size(); ++k)
            out << sx(series[s].x[k]) << ',' << sy(series[s].y[k]) << ' ';
        out << "\"/>\n";
        if (s >= legend_cap) continue;
        const double ly = mt + 16 + 18 * static_cast<double>(s);
        out << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly << "\" x2=\""
            << ml + pw + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[s].label
            << "</text>\n";
    }
    if (series.size() > legend_cap)
        out << "<text x=\"" << ml + pw + 12 << "\" y=\""
            << mt + 16 + 18 * static_cast<double>(legend_cap) + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">(+"
            << series.size() - legend_cap << " more)</text>\n";
    out << "</svg>\n";
}

} // namespace dropt
