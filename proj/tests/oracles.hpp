#pragma once

// Independent reference computations for tests. Nothing here calls the code
// under test beyond plain data types.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "profile_forge/geometry.hpp"
#include "profile_forge/profile.hpp"

namespace oracle {

using pforge::Point2;

inline double orient(Point2 a, Point2 b, Point2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

// Proper or touching intersection of two closed segments.
inline bool segments_meet(Point2 a, Point2 b, Point2 c, Point2 d)
{
    const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
    auto on = [](Point2 p, Point2 q, Point2 r, double o) {
        return o == 0.0 && std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
               r.y <= std::max(p.y, q.y);
    };
    return on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4);
}

// Arc sampled by angle from its three defining points, without the
// library's arc helpers.
inline std::vector<Point2> sample_arc(Point2 s, Point2 m, Point2 e, int n)
{
    const double ax = s.x, ay = s.y, bx = m.x, by = m.y, cx = e.x, cy = e.y;
    const double d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    const double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d;
    const double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d;
    const double r = std::hypot(ax - ux, ay - uy);
    const double a0 = std::atan2(ay - uy, ax - ux);
    const double am = std::atan2(by - uy, bx - ux);
    const double a1 = std::atan2(cy - uy, cx - ux);
    const double two_pi = 2 * std::acos(-1.0);
    auto ccw_gap = [&](double from, double to) {
        double g = std::fmod(to - from, two_pi);
        return g < 0 ? g + two_pi : g;
    };
    // go the way that passes through m
    const bool ccw = ccw_gap(a0, am) < ccw_gap(a0, a1);
    const double sweep = ccw ? ccw_gap(a0, a1) : -ccw_gap(a1, a0);
    std::vector<Point2> pts;
    for (int i = 0; i <= n; ++i) {
        const double t = a0 + sweep * i / n;
        pts.push_back({ux + r * std::cos(t), uy + r * std::sin(t)});
    }
    pts.front() = s;
    pts.back() = e;
    return pts;
}

inline std::vector<Point2> sample_curve(const pforge::Curve& c, int n)
{
    if (const auto* l = std::get_if<pforge::LineSegment>(&c)) return {l->start, l->end};
    const auto& a = std::get<pforge::ArcSegment>(c);
    return sample_arc(a.start, a.mid, a.end, n);
}

// Does any chord of polyline a cross any chord of polyline b? Plain O(n*m)
// pair test; chords of b are grouped in blocks of 32 whose boxes are checked
// first, which only skips pairs that cannot meet. `skip` rejects pairs that
// share an end point by construction.
template <class Skip>
bool polylines_meet(const std::vector<Point2>& a, const std::vector<Point2>& b, Skip skip)
{
    constexpr std::size_t kBlock = 32;
    struct Box {
        double x0, y0, x1, y1;
    };
    auto box_of = [](const std::vector<Point2>& p, std::size_t from, std::size_t to) {
        Box bx{1e300, 1e300, -1e300, -1e300};
        for (std::size_t k = from; k <= to; ++k) {
            bx.x0 = std::min(bx.x0, p[k].x);
            bx.y0 = std::min(bx.y0, p[k].y);
            bx.x1 = std::max(bx.x1, p[k].x);
            bx.y1 = std::max(bx.y1, p[k].y);
        }
        return bx;
    };
    auto overlap = [](const Box& p, const Box& q) {
        return p.x0 <= q.x1 && q.x0 <= p.x1 && p.y0 <= q.y1 && q.y0 <= p.y1;
    };
    if (a.size() < 2 || b.size() < 2) return false;
    std::vector<Box> blocks;
    for (std::size_t v = 0; v + 1 < b.size(); v += kBlock)
        blocks.push_back(box_of(b, v, std::min(v + kBlock, b.size() - 1)));
    for (std::size_t u = 0; u + 1 < a.size(); ++u) {
        const Box ca = box_of(a, u, u + 1);
        for (std::size_t blk = 0; blk < blocks.size(); ++blk) {
            if (!overlap(ca, blocks[blk])) continue;
            const std::size_t v0 = blk * kBlock, v1 = std::min(v0 + kBlock, b.size() - 1);
            for (std::size_t v = v0; v < v1; ++v) {
                if (skip(u, v)) continue;
                if (segments_meet(a[u], a[u + 1], b[v], b[v + 1])) return true;
            }
        }
    }
    return false;
}

// Discretized self-intersection check of one closed chain. Curves that share
// an end point may only meet there: their chords next to the shared vertex
// are skipped.
inline bool brute_self_intersects(const pforge::Loop& loop, int arc_chords = 512)
{
    const std::size_t n = loop.curves.size();
    std::vector<std::vector<Point2>> polys;
    for (const auto& c : loop.curves) polys.push_back(sample_curve(c, arc_chords));
    for (std::size_t i = 0; i < n; ++i) {
        // chords within one arc cannot cross each other (it is convex and
        // sweeps less than a full turn)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool next = j == i + 1;
            const bool wrap = i == 0 && j == n - 1;
            const std::size_t na = polys[i].size(), nb = polys[j].size();
            auto skip = [&](std::size_t u, std::size_t v) {
                return (next && u + 2 == na && v == 0) || (wrap && u == 0 && v + 2 == nb);
            };
            if (polylines_meet(polys[i], polys[j], skip)) return true;
        }
    }
    return false;
}

// Distance from q to a curve, computed from the three defining points.
inline double oracle_curve_distance(Point2 q, const pforge::Curve& c)
{
    if (const auto* l = std::get_if<pforge::LineSegment>(&c)) {
        const double vx = l->end.x - l->start.x, vy = l->end.y - l->start.y;
        const double len2 = vx * vx + vy * vy;
        double t = len2 > 0 ? ((q.x - l->start.x) * vx + (q.y - l->start.y) * vy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return std::hypot(q.x - l->start.x - t * vx, q.y - l->start.y - t * vy);
    }
    const auto& a = std::get<pforge::ArcSegment>(c);
    const double ax = a.start.x, ay = a.start.y, bx = a.mid.x, by = a.mid.y, cx = a.end.x, cy = a.end.y;
    const double d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    const double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d;
    const double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d;
    const double r = std::hypot(ax - ux, ay - uy);
    const double two_pi = 2 * std::acos(-1.0);
    auto gap = [&](double from, double to) {
        double g = std::fmod(to - from, two_pi);
        return g < 0 ? g + two_pi : g;
    };
    const double a0 = std::atan2(ay - uy, ax - ux), am = std::atan2(by - uy, bx - ux), a1 = std::atan2(cy - uy, cx - ux);
    const double aq = std::atan2(q.y - uy, q.x - ux);
    const bool ccw = gap(a0, am) < gap(a0, a1);
    const bool inside = ccw ? gap(a0, aq) <= gap(a0, a1) : gap(aq, a0) <= gap(a1, a0);
    if (inside) return std::abs(std::hypot(q.x - ux, q.y - uy) - r);
    return std::min(std::hypot(q.x - ax, q.y - ay), std::hypot(q.x - cx, q.y - cy));
}

inline double oracle_profile_distance(Point2 q, const pforge::Profile& p)
{
    double best = 1e300;
    for (const auto& l : p.loops) {
        if (l.is_circle()) {
            best = std::min(best, std::abs(std::hypot(q.x - l.circle->center.x, q.y - l.circle->center.y) - l.circle->radius));
            continue;
        }
        for (const auto& c : l.curves) best = std::min(best, oracle_curve_distance(q, c));
    }
    return best;
}

// Points spread along every curve of a profile, `per_curve` intervals each.
inline std::vector<Point2> boundary_points(const pforge::Profile& p, int per_curve)
{
    std::vector<Point2> out;
    for (const auto& l : p.loops) {
        if (l.is_circle()) {
            const auto& c = *l.circle;
            for (int k = 0; k < 4 * per_curve; ++k) {
                const double t = 2 * std::acos(-1.0) * k / (4 * per_curve);
                out.push_back({c.center.x + c.radius * std::cos(t), c.center.y + c.radius * std::sin(t)});
            }
            continue;
        }
        for (const auto& c : l.curves) {
            if (const auto* s = std::get_if<pforge::LineSegment>(&c)) {
                for (int k = 0; k <= per_curve; ++k) {
                    const double t = double(k) / per_curve;
                    out.push_back({s->start.x + t * (s->end.x - s->start.x), s->start.y + t * (s->end.y - s->start.y)});
                }
            } else {
                auto a = sample_curve(c, per_curve);
                out.insert(out.end(), a.begin(), a.end());
            }
        }
    }
    return out;
}

// Two-sided Hausdorff distance: exact distances from dense samples of each
// boundary to the other boundary.
inline double hausdorff(const pforge::Profile& a, const pforge::Profile& b, int per_curve = 64)
{
    double worst = 0.0;
    for (Point2 q : boundary_points(a, per_curve)) worst = std::max(worst, oracle_profile_distance(q, b));
    for (Point2 q : boundary_points(b, per_curve)) worst = std::max(worst, oracle_profile_distance(q, a));
    return worst;
}

// Any two loops of a profile crossing, or any loop crossing itself.
inline bool brute_profile_intersects(const pforge::Profile& p, int arc_chords = 512)
{
    std::vector<std::vector<Point2>> polys;
    for (const auto& l : p.loops) {
        if (l.is_circle()) {
            const auto& c = *l.circle;
            std::vector<Point2> q;
            for (int k = 0; k <= 4 * arc_chords; ++k) {
                const double t = 2 * std::acos(-1.0) * k / (4 * arc_chords);
                q.push_back({c.center.x + c.radius * std::cos(t), c.center.y + c.radius * std::sin(t)});
            }
            polys.push_back(std::move(q));
            continue;
        }
        if (brute_self_intersects(l, arc_chords)) return true;
        std::vector<Point2> q;
        for (const auto& c : l.curves) {
            auto s = sample_curve(c, arc_chords);
            q.insert(q.end(), s.begin(), s.end());
        }
        polys.push_back(std::move(q));
    }
    auto never = [](std::size_t, std::size_t) { return false; };
    for (std::size_t i = 0; i < polys.size(); ++i)
        for (std::size_t j = i + 1; j < polys.size(); ++j)
            if (polylines_meet(polys[i], polys[j], never)) return true;
    return false;
}

// Random closed chain of 3 to 8 curves inside [-0.45, 0.45]^2. Vertices are
// either sorted by angle (usually simple) or left in draw order (usually
// not); about a third of the edges bulge into arcs.
inline pforge::Loop random_loop(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 3 + static_cast<int>(rng() % 6);
    const bool star = u(rng) < 0.5;
    std::vector<std::pair<double, Point2>> vs;
    for (int i = 0; i < n; ++i) {
        const double a = 2 * std::acos(-1.0) * u(rng);
        const double r = 0.1 + 0.3 * u(rng);
        vs.push_back({star ? a : double(i), {r * std::cos(a), r * std::sin(a)}});
    }
    std::sort(vs.begin(), vs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<pforge::Curve> cs;
    for (int i = 0; i < n; ++i) {
        const Point2 a = vs[static_cast<std::size_t>(i)].second;
        const Point2 b = vs[static_cast<std::size_t>((i + 1) % n)].second;
        if (u(rng) < 0.35) {
            const double bulge = (u(rng) - 0.5) * 0.8;
            const Point2 m{0.5 * (a.x + b.x) - bulge * (b.y - a.y), 0.5 * (a.y + b.y) + bulge * (b.x - a.x)};
            cs.emplace_back(pforge::ArcSegment{a, m, b});
        } else {
            cs.emplace_back(pforge::LineSegment{a, b});
        }
    }
    return pforge::Loop::of_curves(std::move(cs));
}

// Line-line fillet tangency residual: distance of centre to each line minus r.
inline double fillet_residual(const pforge::DirectedLine& l1, const pforge::DirectedLine& l2, Point2 s, Point2 m,
                              Point2 e, double r)
{
    // centre from s moving along l1's left normal
    const Point2 n1{-std::sin(l1.phi), std::cos(l1.phi)};
    const Point2 c{s.x + r * n1.x, s.y + r * n1.y};
    auto sd = [](const pforge::DirectedLine& l, Point2 p) {
        return -std::sin(l.phi) * p.x + std::cos(l.phi) * p.y - l.d;
    };
    double worst = 0.0;
    worst = std::max(worst, std::abs(sd(l1, c) - r));
    worst = std::max(worst, std::abs(sd(l2, c) - r));
    worst = std::max(worst, std::abs(sd(l1, s)));
    worst = std::max(worst, std::abs(sd(l2, e)));
    worst = std::max(worst, std::abs(std::hypot(m.x - c.x, m.y - c.y) - r));
    worst = std::max(worst, std::abs(std::hypot(e.x - c.x, e.y - c.y) - r));
    return worst;
}

// Area of a polygon by the shoelace formula.
inline double shoelace(const std::vector<Point2>& p)
{
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Point2 q = p[i], r = p[(i + 1) % p.size()];
        a += q.x * r.y - r.x * q.y;
    }
    return 0.5 * a;
}

}  // namespace oracle
