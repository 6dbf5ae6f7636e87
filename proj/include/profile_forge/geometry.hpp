#pragma once

// Closed-form 2D geometry used by the construction language.
//
// Lines are directed and stored in Hessian normal form (phi, d): direction
// t = (cos phi, sin phi), left normal n = (-sin phi, cos phi), and a point p
// lies on the line iff dot(p, n) == d. Positive offsets move a line to its
// left. Circles carry an orientation flag; a counter-clockwise circle has its
// interior on the left, so positive circle offsets shrink ccw circles and
// grow cw ones.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace pforge {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Coincidence tolerance in model units (one quantization bin).
inline constexpr double kLengthTol = 1.0 / 127.0;
// Parallelism tolerance for analysis (1 degree).
inline constexpr double kAngleTol = kPi / 180.0;
// Kernel-level parallel threshold on |sin(phi1 - phi2)|.
inline constexpr double kParallelEps = 1e-12;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
inline constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline constexpr Point2 perp(Point2 a) { return {-a.y, a.x}; }
inline Point2 unit_at(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline Point2 lerp(Point2 a, Point2 b, double t) { return a + t * (b - a); }

inline Point2 rotate(Point2 v, double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Maps any angle to [0, 2pi).
inline double normalize_angle(double a)
{
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

// Smallest absolute difference between two angles, in [0, pi].
inline double angle_between(double a, double b)
{
    const double d = normalize_angle(a - b);
    return std::min(d, kTwoPi - d);
}

// Difference between two undirected directions, in [0, pi/2].
inline double direction_gap(double a, double b)
{
    const double d = angle_between(a, b);
    return std::min(d, kPi - d);
}

struct DirectedLine {
    double phi = 0.0;
    double d = 0.0;

    Point2 direction() const { return unit_at(phi); }
    Point2 normal() const { return perp(direction()); }
    // Signed distance of p from the line, positive on the left.
    double signed_distance(Point2 p) const { return dot(p, normal()) - d; }
    Point2 foot() const { return d * normal(); }
    Point2 project(Point2 p) const { return p - signed_distance(p) * normal(); }

    static DirectedLine make(double phi, double d) { return {normalize_angle(phi), d}; }

    static DirectedLine through(Point2 a, Point2 b)
    {
        const Point2 v = b - a;
        const double phi = normalize_angle(std::atan2(v.y, v.x));
        return {phi, dot(a, perp(unit_at(phi)))};
    }

    friend bool operator==(const DirectedLine&, const DirectedLine&) = default;
};

struct OrientedCircle {
    Point2 center;
    double radius = 0.0;
    bool ccw = true;

    Point2 at(double angle) const { return center + radius * unit_at(angle); }
    double radial_residual(Point2 p) const { return std::abs(distance(p, center) - radius); }

    friend bool operator==(const OrientedCircle&, const OrientedCircle&) = default;
};

struct LineSegment {
    Point2 start;
    Point2 end;

    double length() const { return distance(start, end); }
    Point2 direction() const
    {
        const Point2 v = end - start;
        return (1.0 / norm(v)) * v;
    }
    DirectedLine carrier() const { return DirectedLine::through(start, end); }

    friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

struct BoundingBox {
    Point2 min{0.0, 0.0};
    Point2 max{0.0, 0.0};

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
    Point2 center() const { return 0.5 * (min + max); }

    void include(Point2 p)
    {
        min = {std::min(min.x, p.x), std::min(min.y, p.y)};
        max = {std::max(max.x, p.x), std::max(max.y, p.y)};
    }

    static BoundingBox empty()
    {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return {{inf, inf}, {-inf, -inf}};
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Circle through three points. Throws NoSolution when they are collinear.
inline OrientedCircle circle_through(Point2 a, Point2 b, Point2 c)
{
    const double den = 2.0 * cross(b - a, c - a);
    const double scale = std::max({norm(b - a), norm(c - a), 1e-300});
    if (std::abs(den) <= 1e-14 * scale * scale) throw NoSolution("collinear arc points");
    const double ab = dot(b - a, b - a);
    const double ac = dot(c - a, c - a);
    const Point2 u = b - a;
    const Point2 v = c - a;
    const Point2 off{(v.y * ab - u.y * ac) / den, (u.x * ac - v.x * ab) / den};
    return {a + off, norm(off), den > 0.0};
}

struct ArcSegment {
    Point2 start;
    Point2 mid;
    Point2 end;

    // Supporting circle, oriented in the direction of travel start -> mid -> end.
    OrientedCircle circle() const { return circle_through(start, mid, end); }

    double start_angle() const
    {
        const Point2 c = circle().center;
        return std::atan2(start.y - c.y, start.x - c.x);
    }

    // Unsigned angular extent in (0, 2pi).
    double sweep() const
    {
        const OrientedCircle c = circle();
        const double a0 = std::atan2(start.y - c.center.y, start.x - c.center.x);
        const double a1 = std::atan2(end.y - c.center.y, end.x - c.center.x);
        const double s = c.ccw ? normalize_angle(a1 - a0) : normalize_angle(a0 - a1);
        return s == 0.0 ? kTwoPi : s;
    }

    double length() const { return circle().radius * sweep(); }

    // Point at fraction t in [0, 1] of the way along the arc.
    Point2 point_at(double t) const
    {
        const OrientedCircle c = circle();
        const double a0 = std::atan2(start.y - c.center.y, start.x - c.center.x);
        const double s = sweep();
        return c.at(c.ccw ? a0 + t * s : a0 - t * s);
    }

    // Unit tangent in the direction of travel at fraction t.
    Point2 tangent_at(double t) const
    {
        const OrientedCircle c = circle();
        const Point2 r = point_at(t) - c.center;
        const Point2 tn = perp((1.0 / norm(r)) * r);
        return c.ccw ? tn : -1.0 * tn;
    }

    // True when the angle of p around the centre falls inside the arc span.
    bool spans(Point2 p, double angle_eps = 1e-12) const
    {
        const OrientedCircle c = circle();
        const double a0 = std::atan2(start.y - c.center.y, start.x - c.center.x);
        const double ap = std::atan2(p.y - c.center.y, p.x - c.center.x);
        const double rel = c.ccw ? normalize_angle(ap - a0) : normalize_angle(a0 - ap);
        return rel <= sweep() + angle_eps || rel >= kTwoPi - angle_eps;
    }

    ArcSegment reversed() const { return {end, mid, start}; }

    friend bool operator==(const ArcSegment&, const ArcSegment&) = default;
};

// ---------------------------------------------------------------------------
// Construction steps
// ---------------------------------------------------------------------------

inline Point2 line_x_line(const DirectedLine& l1, const DirectedLine& l2)
{
    const Point2 n1 = l1.normal();
    const Point2 n2 = l2.normal();
    const double det = cross(n1, n2);
    if (std::abs(det) <= kParallelEps) throw NoSolution("LineXLine: parallel lines");
    return {(l1.d * n2.y - l2.d * n1.y) / det, (n1.x * l2.d - n2.x * l1.d) / det};
}

// One point for a tangent, otherwise two points ordered along the line.
inline std::vector<Point2> line_x_circle(const DirectedLine& l, const OrientedCircle& c)
{
    const double s = l.signed_distance(c.center);
    if (std::abs(s) > c.radius + 1e-12) throw NoSolution("LineXCircle: line misses circle");
    const Point2 foot = c.center - s * l.normal();
    const double h = std::sqrt(std::max(0.0, c.radius * c.radius - s * s));
    if (h <= 1e-12) return {foot};
    const Point2 t = l.direction();
    return {foot - h * t, foot + h * t};
}

inline DirectedLine line_offset_line(const DirectedLine& l, double offset)
{
    return {l.phi, l.d + offset};
}

// The one place the circle-offset side rule lives.
inline OrientedCircle circle_offset_circle(const OrientedCircle& c, double offset)
{
    if (!(offset > 0.0)) throw NoSolution("CircleOffsetCircle: offset must be positive");
    const double r = c.ccw ? c.radius - offset : c.radius + offset;
    if (!(r > 0.0)) throw NoSolution("CircleOffsetCircle: radius collapses");
    return {c.center, r, c.ccw};
}

inline DirectedLine line_reverse(const DirectedLine& l)
{
    return {normalize_angle(l.phi + kPi), -l.d};
}

inline OrientedCircle circle_reverse(const OrientedCircle& c)
{
    return {c.center, c.radius, !c.ccw};
}

inline Point2 point_sym_point(Point2 p, const DirectedLine& sym)
{
    return p - 2.0 * sym.signed_distance(p) * sym.normal();
}

inline DirectedLine line_sym_line(const DirectedLine& l, const DirectedLine& sym)
{
    const Point2 ns = sym.normal();
    const Point2 t = l.direction();
    const Point2 t2 = t - 2.0 * dot(t, ns) * ns;
    const Point2 p = point_sym_point(l.foot(), sym);
    const double phi = normalize_angle(std::atan2(t2.y, t2.x));
    return {phi, dot(p, perp(unit_at(phi)))};
}

inline DirectedLine line_axis_rotated_line(const DirectedLine& l, Point2 pivot, double angle)
{
    const double phi = normalize_angle(l.phi + angle);
    const Point2 p = pivot + rotate(l.foot() - pivot, angle);
    return {phi, dot(p, perp(unit_at(phi)))};
}

inline DirectedLine line_datum_parallel_line(const DirectedLine& l, Point2 datum)
{
    return {l.phi, dot(datum, l.normal())};
}

// Of the two tangents parallel to l, returns the one with the circle on its left.
inline DirectedLine line_circle_parallel_line(const DirectedLine& l, const OrientedCircle& c)
{
    return {l.phi, dot(c.center, l.normal()) - c.radius};
}

// First output: sym offset to the left. Second: sym offset to the right, reversed.
inline std::array<DirectedLine, 2> sym_line_offset_line_line(const DirectedLine& sym, double offset)
{
    if (!(offset > 0.0)) throw NoSolution("SymLineOffsetLineLine: offset must be positive");
    return {line_offset_line(sym, offset), line_reverse(line_offset_line(sym, -offset))};
}

inline OrientedCircle point_radius_circle(Point2 center, double radius, bool ccw)
{
    if (!(radius > 0.0)) throw NoSolution("PointRadiusCircle: radius must be positive");
    return {center, radius, ccw};
}

// Mid point of the span running from start to end in the circle's direction.
inline ArcSegment circle_point_point_arc(const OrientedCircle& c, Point2 start, Point2 end)
{
    if (c.radial_residual(start) > kLengthTol || c.radial_residual(end) > kLengthTol)
        throw NoSolution("CirclePointPointArc: point off circle");
    if (distance(start, end) <= 1e-12) throw NoSolution("CirclePointPointArc: coincident end points");
    const double a0 = std::atan2(start.y - c.center.y, start.x - c.center.x);
    const double a1 = std::atan2(end.y - c.center.y, end.x - c.center.x);
    const double mid = c.ccw ? a0 + 0.5 * normalize_angle(a1 - a0) : a0 - 0.5 * normalize_angle(a0 - a1);
    return {start, c.at(mid), end};
}

// Fillet at the intersection of the two left offsets; the arc runs
// counter-clockwise from its contact with l1 to its contact with l2.
inline ArcSegment line_line_fillet(const DirectedLine& l1, const DirectedLine& l2, double radius)
{
    if (!(radius > 0.0)) throw NoSolution("LineLineFillet: radius must be positive");
    const Point2 center = line_x_line(line_offset_line(l1, radius), line_offset_line(l2, radius));
    const Point2 start = center - radius * l1.normal();
    const Point2 end = center - radius * l2.normal();
    const OrientedCircle c{center, radius, true};
    const double a0 = std::atan2(start.y - center.y, start.x - center.x);
    const double a1 = std::atan2(end.y - center.y, end.x - center.x);
    return {start, c.at(a0 + 0.5 * normalize_angle(a1 - a0)), end};
}

}  // namespace pforge
