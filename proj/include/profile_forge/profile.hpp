#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "geometry.hpp"

namespace pforge {

using Curve = std::variant<LineSegment, ArcSegment>;

inline Point2 curve_start(const Curve& c)
{
    return std::visit([](const auto& s) { return s.start; }, c);
}

inline Point2 curve_end(const Curve& c)
{
    return std::visit([](const auto& s) { return s.end; }, c);
}

inline double curve_length(const Curve& c)
{
    return std::visit([](const auto& s) { return s.length(); }, c);
}

inline bool is_line(const Curve& c) { return std::holds_alternative<LineSegment>(c); }
inline bool is_arc(const Curve& c) { return std::holds_alternative<ArcSegment>(c); }

inline Curve reversed(const Curve& c)
{
    if (const auto* l = std::get_if<LineSegment>(&c)) return LineSegment{l->end, l->start};
    return std::get<ArcSegment>(c).reversed();
}

// Unit tangent at the start (t = 0) or end (t = 1) of a curve.
inline Point2 curve_tangent(const Curve& c, double t)
{
    if (const auto* l = std::get_if<LineSegment>(&c)) return l->direction();
    return std::get<ArcSegment>(c).tangent_at(t);
}

// A loop is either a single full circle or a closed chain of curves.
struct Loop {
    std::vector<Curve> curves;
    std::optional<OrientedCircle> circle;

    bool is_circle() const { return circle.has_value(); }
    std::size_t size() const { return is_circle() ? 1 : curves.size(); }

    static Loop of_circle(const OrientedCircle& c) { return {{}, c}; }
    static Loop of_curves(std::vector<Curve> cs) { return {std::move(cs), std::nullopt}; }

    friend bool operator==(const Loop&, const Loop&) = default;
};

// First loop is the outer loop.
struct Profile {
    std::vector<Loop> loops;

    std::size_t curve_count() const
    {
        std::size_t n = 0;
        for (const auto& l : loops) n += l.size();
        return n;
    }

    friend bool operator==(const Profile&, const Profile&) = default;
};

// Number of chords needed so each chord's sagitta stays below `sagitta`.
inline int arc_chord_count(double radius, double sweep, double sagitta)
{
    if (radius <= sagitta) return std::max(4, static_cast<int>(std::ceil(sweep / (kPi / 8))));
    const double max_step = 2.0 * std::acos(1.0 - sagitta / radius);
    return std::max(1, static_cast<int>(std::ceil(sweep / max_step)));
}

// Polyline approximation of a curve including both end points.
inline std::vector<Point2> discretize(const Curve& c, double sagitta)
{
    if (const auto* l = std::get_if<LineSegment>(&c)) return {l->start, l->end};
    const auto& a = std::get<ArcSegment>(c);
    const OrientedCircle circ = a.circle();
    const int n = arc_chord_count(circ.radius, a.sweep(), sagitta);
    std::vector<Point2> pts;
    pts.reserve(n + 1);
    pts.push_back(a.start);
    for (int i = 1; i < n; ++i) pts.push_back(a.point_at(static_cast<double>(i) / n));
    pts.push_back(a.end);
    return pts;
}

// Closed polygon (no repeated first point) approximating a loop.
inline std::vector<Point2> discretize(const Loop& loop, double sagitta)
{
    std::vector<Point2> poly;
    if (loop.is_circle()) {
        const auto& c = *loop.circle;
        const int n = std::max(8, arc_chord_count(c.radius, kTwoPi, sagitta));
        for (int i = 0; i < n; ++i) {
            const double a = kTwoPi * i / n;
            poly.push_back(c.at(c.ccw ? a : -a));
        }
        return poly;
    }
    for (const auto& c : loop.curves) {
        auto pts = discretize(c, sagitta);
        poly.insert(poly.end(), pts.begin(), pts.end() - 1);
    }
    return poly;
}

inline double polygon_signed_area(const std::vector<Point2>& poly)
{
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
    return 0.5 * a;
}

// Exact signed area enclosed by a loop (positive when counter-clockwise).
inline double loop_signed_area(const Loop& loop)
{
    if (loop.is_circle()) {
        const auto& c = *loop.circle;
        return (c.ccw ? 1.0 : -1.0) * kPi * c.radius * c.radius;
    }
    double area = 0.0;
    for (const auto& c : loop.curves) {
        const Point2 s = curve_start(c);
        const Point2 e = curve_end(c);
        area += 0.5 * cross(s, e);
        if (const auto* a = std::get_if<ArcSegment>(&c)) {
            const OrientedCircle circ = a->circle();
            const double th = a->sweep();
            const double seg = 0.5 * circ.radius * circ.radius * (th - std::sin(th));
            area += circ.ccw ? seg : -seg;
        }
    }
    return area;
}

inline BoundingBox bounding_box(const Profile& p)
{
    BoundingBox box = BoundingBox::empty();
    for (const auto& loop : p.loops) {
        if (loop.is_circle()) {
            const auto& c = *loop.circle;
            box.include(c.center - Point2{c.radius, c.radius});
            box.include(c.center + Point2{c.radius, c.radius});
            continue;
        }
        for (const auto& cv : loop.curves) {
            box.include(curve_start(cv));
            if (const auto* a = std::get_if<ArcSegment>(&cv)) {
                const OrientedCircle circ = a->circle();
                for (int k = 0; k < 4; ++k) {
                    const Point2 q = circ.at(k * kPi / 2);
                    if (a->spans(q)) box.include(q);
                }
                box.include(a->end);
            }
        }
    }
    return box;
}

inline double point_curve_distance(Point2 p, const Curve& c)
{
    if (const auto* l = std::get_if<LineSegment>(&c)) {
        const Point2 v = l->end - l->start;
        const double len2 = dot(v, v);
        const double t = len2 > 0.0 ? std::clamp(dot(p - l->start, v) / len2, 0.0, 1.0) : 0.0;
        return distance(p, l->start + t * v);
    }
    const auto& a = std::get<ArcSegment>(c);
    const OrientedCircle circ = a.circle();
    const Point2 r = p - circ.center;
    const double rn = norm(r);
    if (rn > 0.0) {
        const Point2 q = circ.center + (circ.radius / rn) * r;
        if (a.spans(q)) return std::abs(rn - circ.radius);
    }
    return std::min(distance(p, a.start), distance(p, a.end));
}

inline double point_loop_distance(Point2 p, const Loop& loop)
{
    if (loop.is_circle()) return loop.circle->radial_residual(p);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : loop.curves) best = std::min(best, point_curve_distance(p, c));
    return best;
}

inline double point_profile_distance(Point2 p, const Profile& prof)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : prof.loops) best = std::min(best, point_loop_distance(p, l));
    return best;
}

// Dense boundary samples, spacing at most `step` model units.
inline std::vector<Point2> boundary_samples(const Profile& p, double step)
{
    std::vector<Point2> out;
    for (const auto& loop : p.loops) {
        if (loop.is_circle()) {
            const auto& c = *loop.circle;
            const int n = std::max(16, static_cast<int>(std::ceil(kTwoPi * c.radius / step)));
            for (int i = 0; i < n; ++i) out.push_back(c.at(kTwoPi * i / n));
            continue;
        }
        for (const auto& cv : loop.curves) {
            const int n = std::max(1, static_cast<int>(std::ceil(curve_length(cv) / step)));
            for (int i = 0; i <= n; ++i) {
                const double t = static_cast<double>(i) / n;
                if (const auto* l = std::get_if<LineSegment>(&cv))
                    out.push_back(lerp(l->start, l->end, t));
                else
                    out.push_back(std::get<ArcSegment>(cv).point_at(t));
            }
        }
    }
    return out;
}

// Symmetric Hausdorff distance between profile boundaries, sampled on one
// side and measured exactly against the other.
inline double hausdorff_distance(const Profile& a, const Profile& b, double step = 1e-3)
{
    if (a.loops.empty() || b.loops.empty())
        return a.loops.empty() && b.loops.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    double h = 0.0;
    for (Point2 p : boundary_samples(a, step)) h = std::max(h, point_profile_distance(p, b));
    for (Point2 p : boundary_samples(b, step)) h = std::max(h, point_profile_distance(p, a));
    return h;
}

// True when every curve starts where the previous one ended (cyclically).
inline bool loop_is_closed(const Loop& loop, double tol = 1e-9)
{
    if (loop.is_circle()) return true;
    if (loop.curves.size() < 2) return false;
    for (std::size_t i = 0; i < loop.curves.size(); ++i) {
        const auto& next = loop.curves[(i + 1) % loop.curves.size()];
        if (distance(curve_end(loop.curves[i]), curve_start(next)) > tol) return false;
    }
    return true;
}

inline Profile transformed(const Profile& p, double scale, Point2 offset)
{
    auto f = [&](Point2 q) { return scale * q + offset; };
    Profile out;
    for (const auto& loop : p.loops) {
        if (loop.is_circle()) {
            const auto& c = *loop.circle;
            out.loops.push_back(Loop::of_circle({f(c.center), std::abs(scale) * c.radius, c.ccw}));
            continue;
        }
        std::vector<Curve> cs;
        for (const auto& cv : loop.curves) {
            if (const auto* l = std::get_if<LineSegment>(&cv))
                cs.emplace_back(LineSegment{f(l->start), f(l->end)});
            else {
                const auto& a = std::get<ArcSegment>(cv);
                cs.emplace_back(ArcSegment{f(a.start), f(a.mid), f(a.end)});
            }
        }
        out.loops.push_back(Loop::of_curves(std::move(cs)));
    }
    return out;
}

}  // namespace pforge
