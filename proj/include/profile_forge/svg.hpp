#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "profile.hpp"
#include "sequence.hpp"

namespace pforge {

namespace detail {

inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", std::abs(v) < 5e-13 ? 0.0 : v);
    return buf;
}

inline std::string xy(Point2 p) { return num(p.x) + " " + num(p.y); }

}  // namespace detail

// Path data in model coordinates (y up); the caller flips the axis.
inline std::string svg_path(const Loop& loop)
{
    std::ostringstream os;
    if (loop.is_circle() || loop.curves.empty()) return {};
    os << "M " << detail::xy(curve_start(loop.curves.front()));
    for (const auto& cv : loop.curves) {
        if (const auto* l = std::get_if<LineSegment>(&cv)) {
            os << " L " << detail::xy(l->end);
            continue;
        }
        const auto& a = std::get<ArcSegment>(cv);
        OrientedCircle c;
        try {
            c = a.circle();
        } catch (const NoSolution&) {
            os << " L " << detail::xy(a.end);
            continue;
        }
        const int large = a.sweep() > kPi ? 1 : 0;
        const int sweep = c.ccw ? 1 : 0;
        os << " A " << detail::num(c.radius) << ' ' << detail::num(c.radius) << " 0 " << large << ' ' << sweep << ' '
           << detail::xy(a.end);
    }
    os << " Z";
    return os.str();
}

struct SvgStyle {
    int pixels = 512;
    double stroke = 0.004;
    bool fill = true;
};

inline std::string render_svg(const Profile& p, const GeometricPrompt* prompt = nullptr, SvgStyle style = {})
{
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.pixels << "\" height=\"" << style.pixels
       << "\" viewBox=\"-0.55 -0.55 1.1 1.1\">\n";
    os << "<g transform=\"scale(1,-1)\">\n";
    std::string d;
    for (const auto& loop : p.loops) {
        if (loop.is_circle()) {
            const auto& c = *loop.circle;
            // Two half arcs so circles join the even-odd fill of the path.
            const Point2 a = c.at(0.0);
            const Point2 b = c.at(kPi);
            d += "M " + detail::xy(a) + " A " + detail::num(c.radius) + " " + detail::num(c.radius) + " 0 1 1 " +
                 detail::xy(b) + " A " + detail::num(c.radius) + " " + detail::num(c.radius) + " 0 1 1 " +
                 detail::xy(a) + " Z ";
            continue;
        }
        d += svg_path(loop) + " ";
    }
    os << "<path class=\"profile\" fill-rule=\"evenodd\" fill=\"" << (style.fill ? "#c8d7ec" : "none")
       << "\" stroke=\"#c0392b\" stroke-width=\"" << detail::num(style.stroke) << "\" d=\"" << d << "\"/>\n";
    if (prompt) {
        for (const auto& b : prompt->bound_lines)
            os << "<line class=\"bound\" stroke=\"#27ae60\" stroke-width=\"" << detail::num(2 * style.stroke)
               << "\" x1=\"" << detail::num(b.start.x) << "\" y1=\"" << detail::num(b.start.y) << "\" x2=\""
               << detail::num(b.end.x) << "\" y2=\"" << detail::num(b.end.y) << "\"/>\n";
        for (const auto& s : prompt->symmetry_lines) {
            const Point2 f = s.foot();
            const Point2 t = s.direction();
            const Point2 a = f - 1.0 * t;
            const Point2 b = f + 1.0 * t;
            os << "<line class=\"symmetry\" stroke=\"#8e44ad\" stroke-dasharray=\"0.02 0.01\" stroke-width=\""
               << detail::num(style.stroke) << "\" x1=\"" << detail::num(a.x) << "\" y1=\"" << detail::num(a.y)
               << "\" x2=\"" << detail::num(b.x) << "\" y2=\"" << detail::num(b.y) << "\"/>\n";
        }
        os << "<circle class=\"cog\" fill=\"#8e44ad\" r=\"" << detail::num(3 * style.stroke) << "\" cx=\""
           << detail::num(prompt->cog.x) << "\" cy=\"" << detail::num(prompt->cog.y) << "\"/>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace pforge
