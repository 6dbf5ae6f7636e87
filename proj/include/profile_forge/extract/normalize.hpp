#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "../errors.hpp"
#include "../geometry.hpp"
#include "../profile.hpp"

namespace pforge {

// q_model = scale * q_raw + offset
struct Similarity {
    double scale = 1.0;
    Point2 offset;

    Point2 apply(Point2 q) const { return scale * q + offset; }
    Similarity inverse() const { return {1.0 / scale, (-1.0 / scale) * offset}; }
};

struct Normalized {
    Profile profile;
    Similarity to_model;
    Similarity to_raw;
};

// Uniform scale and translation fitting the profile's bounding box into the
// unit square centred on the origin.
inline Normalized normalize_profile(const Profile& p)
{
    if (p.loops.empty()) throw DegenerateProfile("profile has no loops");
    const BoundingBox box = bounding_box(p);
    const double extent = std::max(box.width(), box.height());
    if (!(extent > 1e-12) || !std::isfinite(extent)) throw DegenerateProfile("profile has zero extent");
    Similarity t{1.0 / extent, (-1.0 / extent) * box.center()};
    Normalized n;
    n.profile = transformed(p, t.scale, t.offset);
    n.to_model = t;
    n.to_raw = t.inverse();
    return n;
}

// Lexicographic (x, then y) comparison with a small tolerance so that
// round-off does not decide ties.
inline bool lex_less(Point2 a, Point2 b, double eps = 1e-9)
{
    if (a.x < b.x - eps) return true;
    if (a.x > b.x + eps) return false;
    return a.y < b.y - eps;
}

namespace detail {

// Re-evaluates an arc through moved end points, keeping its bulge side.
inline ArcSegment refit_arc(const ArcSegment& a, Point2 s, Point2 e)
{
    try {
        const OrientedCircle c = a.circle();
        ArcSegment tmp{s, a.mid, e};
        const OrientedCircle nc = tmp.circle();
        if (nc.ccw != c.ccw) return {s, lerp(s, e, 0.5), e};
        return circle_point_point_arc(nc, s, e);
    } catch (const NoSolution&) {
        return {s, lerp(s, e, 0.5), e};
    }
}

inline Curve with_ends(const Curve& c, Point2 s, Point2 e)
{
    if (is_line(c)) return LineSegment{s, e};
    return refit_arc(std::get<ArcSegment>(c), s, e);
}

inline double safe_length(const Curve& c)
{
    try {
        return curve_length(c);
    } catch (const NoSolution&) {
        return distance(curve_start(c), curve_end(c));
    }
}

inline Loop reversed_loop(const Loop& l)
{
    if (l.is_circle()) return Loop::of_circle(circle_reverse(*l.circle));
    std::vector<Curve> cs;
    for (auto it = l.curves.rbegin(); it != l.curves.rend(); ++it) cs.push_back(reversed(*it));
    return Loop::of_curves(std::move(cs));
}

inline std::vector<Curve> drop_short_curves(std::vector<Curve> cs)
{
    for (;;) {
        if (cs.size() < 2) return cs;
        std::size_t worst = cs.size();
        double worst_len = kLengthTol;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const double len = safe_length(cs[i]);
            if (len < worst_len) {
                worst_len = len;
                worst = i;
            }
        }
        if (worst == cs.size()) return cs;
        const std::size_t n = cs.size();
        const Point2 m = lerp(curve_start(cs[worst]), curve_end(cs[worst]), 0.5);
        const std::size_t prev = (worst + n - 1) % n;
        const std::size_t next = (worst + 1) % n;
        cs[prev] = with_ends(cs[prev], curve_start(cs[prev]), m);
        cs[next] = with_ends(cs[next], m, curve_end(cs[next]));
        cs.erase(cs.begin() + static_cast<std::ptrdiff_t>(worst));
    }
}

inline std::vector<Curve> merge_collinear(std::vector<Curve> cs)
{
    bool changed = true;
    while (changed && cs.size() > 2) {
        changed = false;
        const std::size_t n = cs.size();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + 1) % n;
            const auto* a = std::get_if<LineSegment>(&cs[i]);
            const auto* b = std::get_if<LineSegment>(&cs[j]);
            if (!a || !b) continue;
            const double gap = angle_between(a->carrier().phi, b->carrier().phi);
            if (gap > kAngleTol) continue;
            const LineSegment merged{a->start, b->end};
            cs[i] = merged;
            cs.erase(cs.begin() + static_cast<std::ptrdiff_t>(j));
            changed = true;
            break;
        }
    }
    return cs;
}

inline std::vector<Curve> midpoint_arcs(std::vector<Curve> cs)
{
    for (auto& c : cs)
        if (const auto* a = std::get_if<ArcSegment>(&c)) c = refit_arc(*a, a->start, a->end);
    return cs;
}

// Makes each curve start exactly where the previous one ends.
inline std::vector<Curve> weld(std::vector<Curve> cs)
{
    const std::size_t n = cs.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const Point2 e = curve_end(cs[i]);
        const Point2 s = curve_start(cs[j]);
        if (e == s) continue;
        const Point2 m = distance(e, s) <= 1e-9 ? e : lerp(e, s, 0.5);
        cs[i] = with_ends(cs[i], curve_start(cs[i]), m);
        cs[j] = with_ends(cs[j], m, curve_end(cs[j]));
    }
    return cs;
}

inline std::vector<Curve> rotate_to_canonical_start(std::vector<Curve> cs)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < cs.size(); ++i)
        if (lex_less(curve_end(cs[i]), curve_end(cs[best]))) best = i;
    std::rotate(cs.begin(), cs.begin() + static_cast<std::ptrdiff_t>(best), cs.end());
    return cs;
}

inline Point2 loop_sort_key(const Loop& l)
{
    if (l.is_circle()) return l.circle->center - Point2{0.0, l.circle->radius};
    return curve_end(l.curves.front());
}

}  // namespace detail

// Canonical form: short curves removed, collinear neighbours merged, arc
// mids at angular midpoints, outer loop counter-clockwise and first, inner
// loops clockwise and sorted, every loop starting at its lexicographically
// smallest curve end point.
inline Profile preprocess(const Profile& p)
{
    std::vector<Loop> loops;
    for (const auto& l : p.loops) {
        if (l.is_circle()) {
            if (kTwoPi * l.circle->radius >= kLengthTol) loops.push_back(l);
            continue;
        }
        auto cs = detail::weld(l.curves);
        cs = detail::drop_short_curves(std::move(cs));
        cs = detail::merge_collinear(std::move(cs));
        cs = detail::midpoint_arcs(std::move(cs));
        if (cs.size() < 2) continue;
        Loop loop = Loop::of_curves(std::move(cs));
        if (std::abs(loop_signed_area(loop)) < 1e-12) continue;
        loops.push_back(std::move(loop));
    }
    if (loops.empty()) throw DegenerateProfile("no curves left after preprocessing");

    std::size_t outer = 0;
    for (std::size_t i = 1; i < loops.size(); ++i)
        if (std::abs(loop_signed_area(loops[i])) > std::abs(loop_signed_area(loops[outer]))) outer = i;
    std::swap(loops[0], loops[outer]);

    for (std::size_t i = 0; i < loops.size(); ++i) {
        const bool want_ccw = i == 0;
        if ((loop_signed_area(loops[i]) > 0) != want_ccw) loops[i] = detail::reversed_loop(loops[i]);
        if (!loops[i].is_circle()) loops[i].curves = detail::rotate_to_canonical_start(std::move(loops[i].curves));
    }
    std::stable_sort(loops.begin() + 1, loops.end(), [](const Loop& a, const Loop& b) {
        return lex_less(detail::loop_sort_key(a), detail::loop_sort_key(b));
    });
    return Profile{std::move(loops)};
}

}  // namespace pforge
