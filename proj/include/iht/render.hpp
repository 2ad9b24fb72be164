#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "iht/basin2d.hpp"

namespace iht {

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string heat_color(double t) {
    // white -> red ramp
    t = std::clamp(t, 0.0, 1.0);
    int r = int(255.0 + t * (180.0 - 255.0));
    int g = int(255.0 + t * (16.0 - 255.0));
    int b = int(255.0 + t * (38.0 - 255.0));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

inline const char* basin_palette(int label) {
    static const char* colors[] = {"#4878cf", "#ee854a", "#6acc65", "#d65f5f",
                                   "#956cb4", "#8c613c", "#dc7ec0", "#797979"};
    if (label < 0) return "#222222";
    return colors[label % 8];
}

}  // namespace detail

/// Value-labeled heatmap over a (mu, m) grid as a standalone SVG.
/// `values[ui][mi]` is the cell for mu_values[ui], m_values[mi].
inline std::string heatmap_svg(const std::string& title,
                               const std::vector<std::size_t>& m_values,
                               const std::vector<double>& mu_values,
                               const std::vector<std::vector<double>>& values,
                               const std::string& comment = "") {
    const int cell = 64, left = 70, top = 50, bottom = 60;
    const int cols = int(m_values.size()), rows = int(mu_values.size());
    const int width = left + cols * cell + 30;
    const int height = top + rows * cell + bottom;

    double vmin = values[0][0], vmax = values[0][0];
    for (const auto& row : values)
        for (double v : row) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    const double span = (vmax > vmin) ? (vmax - vmin) : 1.0;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\">\n";
    if (!comment.empty()) os << "<!-- " << comment << " -->\n";
    os << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
       << title << "</text>\n";
    for (int ui = 0; ui < rows; ++ui) {
        for (int mi = 0; mi < cols; ++mi) {
            double v = values[std::size_t(ui)][std::size_t(mi)];
            int x = left + mi * cell, y = top + ui * cell;
            os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\""
               << detail::heat_color((v - vmin) / span) << "\" stroke=\"#999\"/>\n";
            os << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
               << detail::svg_num(v) << "</text>\n";
        }
        os << "<text x=\"" << left - 8 << "\" y=\"" << top + ui * cell + cell / 2 + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">mu="
           << detail::svg_num(mu_values[std::size_t(ui)]) << "</text>\n";
    }
    for (int mi = 0; mi < cols; ++mi)
        os << "<text x=\"" << left + mi * cell + cell / 2 << "\" y=\"" << top + rows * cell + 16
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">m="
           << m_values[std::size_t(mi)] << "</text>\n";

    // Color scale: discrete swatches with the endpoints labeled.
    const int sw = 24, sy = top + rows * cell + 28;
    for (int i = 0; i < 8; ++i)
        os << "<rect x=\"" << left + i * sw << "\" y=\"" << sy << "\" width=\"" << sw
           << "\" height=\"12\" fill=\"" << detail::heat_color(i / 7.0) << "\"/>\n";
    os << "<text x=\"" << left << "\" y=\"" << sy + 24
       << "\" font-family=\"sans-serif\" font-size=\"10\">" << detail::svg_num(vmin)
       << "</text>\n";
    os << "<text x=\"" << left + 8 * sw << "\" y=\"" << sy + 24
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
       << detail::svg_num(vmax) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

/// Basin map: grid starts colored by the fixed point they converge to,
/// fixed points marked, the global minimum drawn with a heavier ring.
inline std::string basin_map_svg(const BasinReport& rep, const BasinStudyConfig& cfg,
                                 const std::string& comment = "") {
    const int g = cfg.grid_points_per_axis;
    const int px = 8, margin = 30;
    const int size = g * px + 2 * margin;
    const double lo = cfg.domain_lo, hi = cfg.domain_hi;
    const double h = (hi - lo) / double(g - 1);

    auto to_px_x = [&](double x) { return margin + (x - lo) / (hi - lo) * (g - 1) * px + px / 2.0; };
    auto to_px_y = [&](double y) { return margin + (hi - y) / (hi - lo) * (g - 1) * px + px / 2.0; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
       << "\">\n";
    if (!comment.empty()) os << "<!-- " << comment << " -->\n";
    os << "<text x=\"" << margin << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"12\">"
       << "setting " << rep.setting_id << "</text>\n";
    for (int iy = 0; iy < g; ++iy) {
        for (int ix = 0; ix < g; ++ix) {
            int lab = rep.labels[std::size_t(iy) * g + ix];
            double sx = lo + ix * h, sy = lo + iy * h;
            os << "<rect x=\"" << detail::svg_num(to_px_x(sx) - px / 2.0) << "\" y=\""
               << detail::svg_num(to_px_y(sy) - px / 2.0) << "\" width=\"" << px
               << "\" height=\"" << px << "\" fill=\"" << detail::basin_palette(lab) << "\"/>\n";
        }
    }
    for (std::size_t c = 0; c < rep.fixed_points.size(); ++c) {
        const auto& fp = rep.fixed_points[c];
        if (!fp.in_domain) continue;
        os << "<circle cx=\"" << detail::svg_num(to_px_x(fp.point[0])) << "\" cy=\""
           << detail::svg_num(to_px_y(fp.point[1])) << "\" r=\"" << (fp.is_global ? 9 : 6)
           << "\" fill=\"white\" stroke=\"black\" stroke-width=\"" << (fp.is_global ? 3 : 1.5)
           << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace iht
