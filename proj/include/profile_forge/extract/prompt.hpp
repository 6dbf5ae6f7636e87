#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "../geometry.hpp"
#include "../metrics.hpp"
#include "../profile.hpp"
#include "../sequence.hpp"

namespace pforge {

// Andrew's monotone chain; counter-clockwise, no collinear points.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts)
{
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2> h(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

inline double hull_area(const std::vector<Point2>& pts)
{
    const auto h = convex_hull(pts);
    return h.size() < 3 ? 0.0 : polygon_signed_area(h);
}

// Same infinite line with phi folded into [0, pi).
inline DirectedLine canonical_axis(const DirectedLine& l)
{
    DirectedLine c = l.phi >= kPi ? line_reverse(l) : l;
    if (c.phi >= kPi - 1e-12) c = {0.0, -c.d};
    return c;
}

namespace detail {

inline bool same_point(Point2 a, Point2 b, double tol) { return distance(a, b) <= tol; }

inline Curve mirrored(const Curve& c, const DirectedLine& s)
{
    if (const auto* l = std::get_if<LineSegment>(&c)) return LineSegment{point_sym_point(l->start, s), point_sym_point(l->end, s)};
    const auto& a = std::get<ArcSegment>(c);
    return ArcSegment{point_sym_point(a.start, s), point_sym_point(a.mid, s), point_sym_point(a.end, s)};
}

inline bool same_curve_unordered(const Curve& a, const Curve& b, double tol)
{
    if (a.index() != b.index()) return false;
    if (const auto* la = std::get_if<LineSegment>(&a)) {
        const auto& lb = std::get<LineSegment>(b);
        return (same_point(la->start, lb.start, tol) && same_point(la->end, lb.end, tol)) ||
               (same_point(la->start, lb.end, tol) && same_point(la->end, lb.start, tol));
    }
    const auto& aa = std::get<ArcSegment>(a);
    const auto& ab = std::get<ArcSegment>(b);
    if (!same_point(aa.mid, ab.mid, tol)) return false;
    return (same_point(aa.start, ab.start, tol) && same_point(aa.end, ab.end, tol)) ||
           (same_point(aa.start, ab.end, tol) && same_point(aa.end, ab.start, tol));
}

inline bool reflects_onto_itself(const Profile& p, const DirectedLine& s, double tol)
{
    std::vector<const Curve*> curves;
    std::vector<const OrientedCircle*> circles;
    for (const auto& l : p.loops) {
        if (l.is_circle())
            circles.push_back(&*l.circle);
        else
            for (const auto& c : l.curves) curves.push_back(&c);
    }
    for (const auto* c : circles) {
        const Point2 m = point_sym_point(c->center, s);
        const bool hit = std::any_of(circles.begin(), circles.end(), [&](const OrientedCircle* o) {
            return same_point(o->center, m, tol) && std::abs(o->radius - c->radius) <= tol;
        });
        if (!hit) return false;
    }
    for (const auto* c : curves) {
        const Curve m = mirrored(*c, s);
        const bool hit = std::any_of(curves.begin(), curves.end(),
                                     [&](const Curve* o) { return same_curve_unordered(*o, m, tol); });
        if (!hit) return false;
    }
    return true;
}

inline std::vector<Point2> key_points(const Profile& p)
{
    std::vector<Point2> pts;
    for (const auto& l : p.loops) {
        if (l.is_circle()) {
            const auto& c = *l.circle;
            for (int k = 0; k < 4; ++k) pts.push_back(c.at(k * kPi / 2));
            continue;
        }
        for (const auto& c : l.curves) {
            pts.push_back(curve_end(c));
            if (const auto* a = std::get_if<ArcSegment>(&c)) pts.push_back(a->mid);
        }
    }
    return pts;
}

// Distance from the line to the nearest of the axis-aligned directions, for ordering.
inline double axis_skew(const DirectedLine& l)
{
    const double a = std::fmod(l.phi, kPi / 2);
    return std::min(a, kPi / 2 - a);
}

}  // namespace detail

inline constexpr std::size_t kMaxSymmetryLines = 4;

// Mirror axes of the whole profile. Candidates are perpendicular bisectors of
// hull vertex pairs plus the extra axes supplied by the caller; an axis is
// kept when every curve reflects onto a curve of the profile within 1/127.
inline std::vector<DirectedLine> detect_symmetry_lines(const Profile& p, const std::vector<DirectedLine>& extra = {})
{
    const auto hull = convex_hull(detail::key_points(p));
    const Point2 cog = profile_cog(p, 1e-3);
    std::vector<DirectedLine> cands = extra;
    for (std::size_t i = 0; i < hull.size(); ++i)
        for (std::size_t j = i + 1; j < hull.size(); ++j) {
            const Point2 v = hull[j] - hull[i];
            if (norm(v) < kLengthTol) continue;
            const Point2 m = lerp(hull[i], hull[j], 0.5);
            cands.push_back(DirectedLine::through(m, m + perp(v)));
        }

    std::vector<DirectedLine> found;
    for (const auto& raw : cands) {
        const DirectedLine c = canonical_axis(raw);
        if (std::abs(c.signed_distance(cog)) > kLengthTol) continue;
        const bool dup = std::any_of(found.begin(), found.end(), [&](const DirectedLine& f) {
            return angle_between(f.phi, c.phi) <= kAngleTol && std::abs(f.d - c.d) <= kLengthTol;
        });
        if (dup) continue;
        if (detail::reflects_onto_itself(p, c, kLengthTol)) found.push_back(c);
    }
    std::sort(found.begin(), found.end(), [](const DirectedLine& a, const DirectedLine& b) {
        const double sa = detail::axis_skew(a), sb = detail::axis_skew(b);
        if (std::abs(sa - sb) > 1e-9) return sa < sb;
        if (std::abs(a.phi - b.phi) > 1e-9) return a.phi < b.phi;
        return a.d < b.d;
    });
    if (found.size() > kMaxSymmetryLines) found.resize(kMaxSymmetryLines);
    return found;
}

// Line segments of the outer loop whose carrier has the whole profile on its
// left, i.e. segments lying on the convex hull.
inline std::vector<LineSegment> hull_segments(const Profile& p)
{
    std::vector<LineSegment> out;
    if (p.loops.empty() || p.loops.front().is_circle()) return out;
    const auto samples = discretize(p.loops.front(), 1e-4);
    for (const auto& c : p.loops.front().curves) {
        const auto* l = std::get_if<LineSegment>(&c);
        if (!l) continue;
        const DirectedLine carrier = l->carrier();
        const bool on_hull = std::all_of(samples.begin(), samples.end(),
                                         [&](Point2 q) { return carrier.signed_distance(q) >= -1e-9; });
        if (on_hull) out.push_back(*l);
    }
    return out;
}

// Partition of hull segments into classes of mutually mirrored segments.
inline std::vector<std::vector<std::size_t>> symmetric_segment_groups(const std::vector<LineSegment>& segs,
                                                                      const std::vector<DirectedLine>& sym)
{
    std::vector<std::size_t> parent(segs.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (const auto& s : sym)
        for (std::size_t i = 0; i < segs.size(); ++i)
            for (std::size_t j = i + 1; j < segs.size(); ++j)
                if (detail::same_curve_unordered(detail::mirrored(segs[i], s), segs[j], kLengthTol))
                    parent[find(i)] = find(j);
    std::vector<std::vector<std::size_t>> groups;
    std::vector<int> slot(segs.size(), -1);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::size_t r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(slot[r])].push_back(i);
    }
    return groups;
}

struct PromptConfig {
    // Chance of dropping each hull segment group whose removal keeps the hull.
    double drop_probability = 0.5;
    // Clearance disks never exceed this radius.
    double max_clearance = 1.0;
};

// Radius of the largest disk around the hole centre that crosses no other curve.
inline double hole_clearance(const Profile& p, std::size_t hole_loop, double cap)
{
    const Point2 c = p.loops[hole_loop].circle->center;
    double best = cap;
    for (std::size_t i = 0; i < p.loops.size(); ++i) {
        if (i == hole_loop) continue;
        best = std::min(best, point_loop_distance(c, p.loops[i]));
    }
    return std::max(best, p.loops[hole_loop].circle->radius);
}

inline std::vector<Point2> datum_candidates(const Profile& p, int category)
{
    const BoundingBox b = bounding_box(p);
    switch (category) {
    case 0: return {b.min, {b.max.x, b.min.y}, b.max, {b.min.x, b.max.y}};
    case 1: {
        const Point2 c = b.center();
        return {{c.x, b.min.y}, {b.max.x, c.y}, {c.x, b.max.y}, {b.min.x, c.y}};
    }
    case 2: return {b.center()};
    default: {
        const OrientedCircle* largest = nullptr;
        for (const auto& l : p.loops)
            if (l.is_circle() && (!largest || l.circle->radius > largest->radius)) largest = &*l.circle;
        if (!largest) return {};
        return {largest->center};
    }
    }
}

inline Point2 choose_datum(const Profile& p, std::mt19937_64& rng)
{
    std::vector<int> cats = {0, 1, 2};
    if (!datum_candidates(p, 3).empty()) cats.push_back(3);
    const int cat = cats[std::uniform_int_distribution<std::size_t>(0, cats.size() - 1)(rng)];
    const auto pts = datum_candidates(p, cat);
    return pts[std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng)];
}

inline GeometricPrompt extract_prompt(const Profile& p, std::uint64_t seed, const PromptConfig& cfg = {})
{
    std::mt19937_64 rng(seed);
    GeometricPrompt g;
    g.bbox = bounding_box(p);
    g.area = std::clamp(profile_area(p), 0.0, 1.0);
    g.complexity = static_cast<int>(p.curve_count());
    g.num_loops = static_cast<int>(p.loops.size());
    g.smooth_fraction = smooth_fraction(p);
    g.cog = profile_cog(p);
    g.datum = choose_datum(p, rng);
    g.symmetry_lines = detect_symmetry_lines(p, {g.datum_x_axis(), g.datum_y_axis()});

    const auto segs = hull_segments(p);
    auto groups = symmetric_segment_groups(segs, g.symmetry_lines);
    std::shuffle(groups.begin(), groups.end(), rng);
    std::vector<bool> keep(segs.size(), true);
    auto ends = [&](const std::vector<bool>& k) {
        std::vector<Point2> pts;
        for (std::size_t i = 0; i < segs.size(); ++i)
            if (k[i]) {
                pts.push_back(segs[i].start);
                pts.push_back(segs[i].end);
            }
        return pts;
    };
    std::bernoulli_distribution drop(cfg.drop_probability);
    for (const auto& grp : groups) {
        auto trial = keep;
        for (std::size_t i : grp) trial[i] = false;
        const double before = hull_area(ends(keep));
        const double after = hull_area(ends(trial));
        const bool legal = after >= before - 1e-12;
        if (drop(rng) && legal) keep = trial;
    }
    for (std::size_t i = 0; i < segs.size(); ++i)
        if (keep[i]) g.bound_lines.push_back(segs[i]);

    for (std::size_t i = 1; i < p.loops.size(); ++i) {
        if (!p.loops[i].is_circle()) continue;
        const auto& c = *p.loops[i].circle;
        g.bolt_holes.push_back({c.center, c.radius, hole_clearance(p, i, cfg.max_clearance)});
    }
    return g;
}

}  // namespace pforge
