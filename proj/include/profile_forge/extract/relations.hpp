#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "../geometry.hpp"
#include "../profile.hpp"

namespace pforge {

// Gap between two undirected directions, in [0, pi/2].
inline double undirected_gap(double a, double b)
{
    const double g = std::fmod(std::abs(a - b), kPi);
    return std::min(g, kPi - g);
}

inline bool same_direction(const DirectedLine& a, const DirectedLine& b, double tol = kAngleTol)
{
    return angle_between(a.phi, b.phi) <= tol;
}

// Position of l along the left normal of ref (l parallel to ref).
inline double position_along(const DirectedLine& l, const DirectedLine& ref)
{
    return dot(l.foot(), ref.normal());
}

// Counts of distance values, keyed to 1e-6.
struct DistanceFrequencies {
    std::map<long long, int> counts;

    static long long key(double v) { return std::llround(std::abs(v) * 1e6); }
    void add(double v) { ++counts[key(v)]; }
    int count(double v) const
    {
        auto it = counts.find(key(v));
        return it == counts.end() ? 0 : it->second;
    }
};

struct CollinearGroup {
    DirectedLine line;
    std::vector<Point2> points;
};

struct ParallelGroup {
    double angle = 0.0;  // undirected, in [0, pi)
    std::vector<DirectedLine> lines;  // distinct infinite lines, first-seen direction
};

struct FilletRelation {
    std::size_t loop = 0;
    std::size_t curve = 0;
    std::size_t prev = 0;
    std::size_t next = 0;
    double radius = 0.0;
    bool convex = true;  // counter-clockwise arc
};

struct SymmetricPair {
    std::size_t axis = 0;
    Point2 a;
    Point2 b;
};

struct ConcentricGroup {
    Point2 center;
    std::vector<double> radii;  // distinct, ascending
};

struct RelationSet {
    std::vector<CollinearGroup> collinear;
    std::vector<ParallelGroup> parallel;
    std::vector<FilletRelation> fillets;
    std::vector<SymmetricPair> symmetric;
    std::vector<ConcentricGroup> concentric;
    DistanceFrequencies distances;
};

inline bool tangent_join(const Curve& a, const Curve& b)
{
    try {
        const Point2 ta = curve_tangent(a, 1.0);
        const Point2 tb = curve_tangent(b, 0.0);
        return std::atan2(std::abs(cross(ta, tb)), dot(ta, tb)) <= kAngleTol;
    } catch (const NoSolution&) {
        return false;
    }
}

// Arc i of the loop, sitting tangentially between two line segments and
// reproduced by a fillet of their carriers.
inline std::optional<FilletRelation> fillet_at(const Loop& loop, std::size_t loop_index, std::size_t i)
{
    if (loop.is_circle() || loop.curves.size() < 3) return std::nullopt;
    const std::size_t n = loop.curves.size();
    const auto* arc = std::get_if<ArcSegment>(&loop.curves[i]);
    const std::size_t ip = (i + n - 1) % n, in = (i + 1) % n;
    const auto* lp = std::get_if<LineSegment>(&loop.curves[ip]);
    const auto* ln = std::get_if<LineSegment>(&loop.curves[in]);
    if (!arc || !lp || !ln) return std::nullopt;
    if (!tangent_join(loop.curves[ip], loop.curves[i]) || !tangent_join(loop.curves[i], loop.curves[in]))
        return std::nullopt;
    try {
        const OrientedCircle c = arc->circle();
        const DirectedLine l1 = lp->carrier(), l2 = ln->carrier();
        const ArcSegment f = c.ccw ? line_line_fillet(l1, l2, c.radius)
                                   : line_line_fillet(line_reverse(l2), line_reverse(l1), c.radius).reversed();
        if (distance(f.start, arc->start) > kLengthTol || distance(f.end, arc->end) > kLengthTol ||
            distance(f.mid, arc->mid) > kLengthTol)
            return std::nullopt;
        return FilletRelation{loop_index, i, ip, in, c.radius, c.ccw};
    } catch (const NoSolution&) {
        return std::nullopt;
    }
}

inline RelationSet analyze_relations(const Profile& p, const std::vector<DirectedLine>& symmetry_lines = {})
{
    RelationSet r;
    std::vector<DirectedLine> carriers;
    std::vector<Point2> vertices;
    struct Round {
        Point2 center;
        double radius;
    };
    std::vector<Round> rounds;

    for (std::size_t li = 0; li < p.loops.size(); ++li) {
        const Loop& loop = p.loops[li];
        if (loop.is_circle()) {
            rounds.push_back({loop.circle->center, loop.circle->radius});
            continue;
        }
        for (std::size_t i = 0; i < loop.curves.size(); ++i) {
            const Curve& c = loop.curves[i];
            vertices.push_back(curve_end(c));
            if (const auto* l = std::get_if<LineSegment>(&c)) {
                carriers.push_back(l->carrier());
            } else {
                const auto& a = std::get<ArcSegment>(c);
                try {
                    const OrientedCircle oc = a.circle();
                    rounds.push_back({oc.center, oc.radius});
                } catch (const NoSolution&) {
                }
                if (auto f = fillet_at(loop, li, i)) r.fillets.push_back(*f);
            }
        }
    }

    // distinct infinite lines
    std::vector<DirectedLine> lines;
    for (const auto& c : carriers) {
        const bool dup = std::any_of(lines.begin(), lines.end(), [&](const DirectedLine& l) {
            return undirected_gap(l.phi, c.phi) <= kAngleTol && std::abs(l.signed_distance(c.foot())) <= kLengthTol;
        });
        if (!dup) lines.push_back(c);
    }

    for (const auto& l : lines) {
        CollinearGroup g{l, {}};
        for (Point2 v : vertices)
            if (std::abs(l.signed_distance(v)) <= kLengthTol) g.points.push_back(v);
        r.collinear.push_back(std::move(g));
    }

    for (const auto& l : lines) {
        const double a = std::fmod(l.phi, kPi);
        auto it = std::find_if(r.parallel.begin(), r.parallel.end(),
                               [&](const ParallelGroup& g) { return undirected_gap(g.angle, a) <= kAngleTol; });
        if (it == r.parallel.end()) {
            r.parallel.push_back({a, {l}});
        } else {
            it->lines.push_back(l);
        }
    }
    for (const auto& g : r.parallel) {
        for (std::size_t i = 0; i < g.lines.size(); ++i)
            for (std::size_t j = i + 1; j < g.lines.size(); ++j) {
                const double dd = std::abs(g.lines[i].signed_distance(g.lines[j].foot()));
                if (dd > kLengthTol) r.distances.add(dd);
            }
    }

    for (std::size_t s = 0; s < symmetry_lines.size(); ++s) {
        for (std::size_t i = 0; i < vertices.size(); ++i)
            for (std::size_t j = i + 1; j < vertices.size(); ++j)
                if (distance(point_sym_point(vertices[i], symmetry_lines[s]), vertices[j]) <= kLengthTol &&
                    distance(vertices[i], vertices[j]) > kLengthTol)
                    r.symmetric.push_back({s, vertices[i], vertices[j]});
    }

    for (const auto& rd : rounds) {
        r.distances.add(rd.radius);
        auto it = std::find_if(r.concentric.begin(), r.concentric.end(),
                               [&](const ConcentricGroup& g) { return distance(g.center, rd.center) <= kLengthTol; });
        if (it == r.concentric.end()) {
            r.concentric.push_back({rd.center, {rd.radius}});
            continue;
        }
        const bool dup = std::any_of(it->radii.begin(), it->radii.end(),
                                     [&](double x) { return std::abs(x - rd.radius) <= 1e-9; });
        if (!dup) it->radii.push_back(rd.radius);
    }
    for (auto& g : r.concentric) {
        std::sort(g.radii.begin(), g.radii.end());
        for (std::size_t i = 0; i < g.radii.size(); ++i)
            for (std::size_t j = i + 1; j < g.radii.size(); ++j) r.distances.add(g.radii[j] - g.radii[i]);
    }
    return r;
}

}  // namespace pforge
