#pragma once

// Validity and prompt-satisfaction metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "profile.hpp"
#include "sequence.hpp"
#include "vm.hpp"

namespace pforge {

// ---------------------------------------------------------------------------
// Exact curve/curve intersection
// ---------------------------------------------------------------------------

// A profile curve or a full circle.
struct Primitive {
    enum class Kind { Segment, Arc, Circle };
    Kind kind = Kind::Segment;
    Point2 a;  // segment start / arc start
    Point2 b;  // segment end / arc end
    OrientedCircle circle;
    ArcSegment arc;

    static Primitive of(const Curve& c)
    {
        Primitive p;
        if (const auto* l = std::get_if<LineSegment>(&c)) {
            p.kind = Kind::Segment;
            p.a = l->start;
            p.b = l->end;
        } else {
            p.kind = Kind::Arc;
            p.arc = std::get<ArcSegment>(c);
            p.a = p.arc.start;
            p.b = p.arc.end;
            p.circle = p.arc.circle();
        }
        return p;
    }

    static Primitive of(const OrientedCircle& c)
    {
        Primitive p;
        p.kind = Kind::Circle;
        p.circle = c;
        p.a = p.b = c.at(0.0);
        return p;
    }

    bool on_round(Point2 q) const { return kind == Kind::Circle || arc.spans(q, 1e-9); }
};

namespace detail {

inline constexpr double kIsectEps = 1e-12;

inline void segment_segment(Point2 a0, Point2 a1, Point2 b0, Point2 b1, std::vector<Point2>& out)
{
    const Point2 r = a1 - a0;
    const Point2 s = b1 - b0;
    const double rs = cross(r, s);
    const double scale = norm(r) * norm(s);
    const Point2 qp = b0 - a0;
    if (std::abs(rs) > kIsectEps * std::max(scale, 1e-300)) {
        const double t = cross(qp, s) / rs;
        const double u = cross(qp, r) / rs;
        const double e = 1e-12;
        if (t >= -e && t <= 1 + e && u >= -e && u <= 1 + e) out.push_back(a0 + std::clamp(t, 0.0, 1.0) * r);
        return;
    }
    const double rr = dot(r, r);
    if (rr == 0.0) return;
    if (std::abs(cross(qp, r)) > 1e-12 * norm(r)) return;  // parallel, apart
    double t0 = dot(qp, r) / rr;
    double t1 = dot(b1 - a0, r) / rr;
    if (t0 > t1) std::swap(t0, t1);
    const double lo = std::max(0.0, t0);
    const double hi = std::min(1.0, t1);
    if (lo > hi + 1e-12) return;
    out.push_back(a0 + lo * r);
    if (hi - lo > 1e-12) out.push_back(a0 + hi * r);
}

inline std::vector<Point2> line_circle_points(Point2 a0, Point2 a1, const OrientedCircle& c)
{
    const Point2 d = a1 - a0;
    const double len = norm(d);
    if (len == 0.0) return {};
    const Point2 t = (1.0 / len) * d;
    const Point2 f = a0 + dot(c.center - a0, t) * t;
    const double h2 = c.radius * c.radius - dot(f - c.center, f - c.center);
    if (h2 < -1e-12 * c.radius * c.radius) return {};
    const double h = std::sqrt(std::max(0.0, h2));
    if (h <= 1e-12) return {f};
    return {f - h * t, f + h * t};
}

inline void segment_round(Point2 a0, Point2 a1, const Primitive& round, std::vector<Point2>& out)
{
    const Point2 d = a1 - a0;
    const double dd = dot(d, d);
    for (Point2 q : line_circle_points(a0, a1, round.circle)) {
        const double t = dot(q - a0, d) / dd;
        if (t < -1e-12 || t > 1 + 1e-12) continue;
        if (round.on_round(q)) out.push_back(q);
    }
}

inline void round_round(const Primitive& p, const Primitive& q, std::vector<Point2>& out)
{
    const OrientedCircle& c1 = p.circle;
    const OrientedCircle& c2 = q.circle;
    const double dist = distance(c1.center, c2.center);
    const double rs = std::max(c1.radius, c2.radius);
    if (dist <= 1e-12 * rs && std::abs(c1.radius - c2.radius) <= 1e-12 * rs) {
        // Same circle: report the ends of any shared span.
        if (p.kind == Primitive::Kind::Circle && q.kind == Primitive::Kind::Circle) {
            out.push_back(c1.at(0.0));
            return;
        }
        if (p.kind == Primitive::Kind::Circle) {
            out.push_back(q.a);
            out.push_back(q.b);
            return;
        }
        if (q.kind == Primitive::Kind::Circle) {
            out.push_back(p.a);
            out.push_back(p.b);
            return;
        }
        for (Point2 e : {p.a, p.b})
            if (q.on_round(e)) out.push_back(e);
        for (Point2 e : {q.a, q.b})
            if (p.on_round(e)) out.push_back(e);
        // Shared interior without shared ends (one arc inside the other) is covered above.
        return;
    }
    if (dist > c1.radius + c2.radius + 1e-12 * rs || dist < std::abs(c1.radius - c2.radius) - 1e-12 * rs || dist == 0.0)
        return;
    const double a = (c1.radius * c1.radius - c2.radius * c2.radius + dist * dist) / (2 * dist);
    const double h = std::sqrt(std::max(0.0, c1.radius * c1.radius - a * a));
    const Point2 u = (1.0 / dist) * (c2.center - c1.center);
    const Point2 m = c1.center + a * u;
    std::vector<Point2> cand;
    if (h <= 1e-12 * rs)
        cand = {m};
    else
        cand = {m + h * perp(u), m - h * perp(u)};
    for (Point2 x : cand)
        if (p.on_round(x) && q.on_round(x)) out.push_back(x);
}

}  // namespace detail

// All points where two primitives meet (overlaps contribute their ends).
inline std::vector<Point2> intersect(const Primitive& p, const Primitive& q)
{
    std::vector<Point2> out;
    using K = Primitive::Kind;
    if (p.kind == K::Segment && q.kind == K::Segment)
        detail::segment_segment(p.a, p.b, q.a, q.b, out);
    else if (p.kind == K::Segment)
        detail::segment_round(p.a, p.b, q, out);
    else if (q.kind == K::Segment)
        detail::segment_round(q.a, q.b, p, out);
    else
        detail::round_round(p, q, out);
    return out;
}

struct CurveRef {
    std::size_t loop = 0;
    std::size_t curve = 0;
};

struct SelfIntersectionReport {
    bool intersection_free = true;
    std::vector<Point2> points;
    std::vector<std::pair<CurveRef, CurveRef>> pairs;
};

namespace detail {

struct IndexedPrimitive {
    Primitive prim;
    CurveRef ref;
    std::size_t loop_size = 1;
};

inline std::vector<IndexedPrimitive> primitives_of(const Profile& p)
{
    std::vector<IndexedPrimitive> out;
    for (std::size_t li = 0; li < p.loops.size(); ++li) {
        const auto& loop = p.loops[li];
        if (loop.is_circle()) {
            out.push_back({Primitive::of(*loop.circle), {li, 0}, 1});
            continue;
        }
        for (std::size_t ci = 0; ci < loop.curves.size(); ++ci) {
            Primitive prim;
            try {
                prim = Primitive::of(loop.curves[ci]);
            } catch (const NoSolution&) {
                // Collinear arc: treat as its chord.
                prim.kind = Primitive::Kind::Segment;
                prim.a = curve_start(loop.curves[ci]);
                prim.b = curve_end(loop.curves[ci]);
            }
            out.push_back({prim, {li, ci}, loop.curves.size()});
        }
    }
    return out;
}

// Shared vertices of two curves that follow each other in a loop.
inline std::vector<Point2> shared_vertices(const IndexedPrimitive& x, const IndexedPrimitive& y)
{
    std::vector<Point2> v;
    if (x.ref.loop != y.ref.loop || x.loop_size < 2) return v;
    const std::size_t n = x.loop_size;
    if ((x.ref.curve + 1) % n == y.ref.curve) v.push_back(x.prim.b);
    if ((y.ref.curve + 1) % n == x.ref.curve) v.push_back(y.prim.b);
    return v;
}

}  // namespace detail

inline SelfIntersectionReport check_self_intersection(const Profile& p)
{
    SelfIntersectionReport rep;
    const auto prims = detail::primitives_of(p);
    for (std::size_t i = 0; i < prims.size(); ++i) {
        for (std::size_t j = i + 1; j < prims.size(); ++j) {
            const auto shared = detail::shared_vertices(prims[i], prims[j]);
            bool hit = false;
            for (Point2 q : intersect(prims[i].prim, prims[j].prim)) {
                bool at_shared = false;
                for (Point2 s : shared) at_shared = at_shared || distance(q, s) <= 1e-9;
                if (at_shared) continue;
                rep.points.push_back(q);
                hit = true;
            }
            if (hit) rep.pairs.push_back({prims[i].ref, prims[j].ref});
        }
    }
    rep.intersection_free = rep.pairs.empty();
    return rep;
}

struct ShortEdgeReport {
    bool ok = true;
    std::vector<CurveRef> offenders;
};

// Edges of length exactly min_len pass.
inline ShortEdgeReport check_short_edges(const Profile& p, double min_len = kLengthTol)
{
    ShortEdgeReport rep;
    for (std::size_t li = 0; li < p.loops.size(); ++li) {
        const auto& loop = p.loops[li];
        if (loop.is_circle()) {
            if (kTwoPi * loop.circle->radius < min_len) rep.offenders.push_back({li, 0});
            continue;
        }
        for (std::size_t ci = 0; ci < loop.curves.size(); ++ci) {
            double len = 0.0;
            try {
                len = curve_length(loop.curves[ci]);
            } catch (const NoSolution&) {
                len = distance(curve_start(loop.curves[ci]), curve_end(loop.curves[ci]));
            }
            if (len < min_len) rep.offenders.push_back({li, ci});
        }
    }
    rep.ok = rep.offenders.empty();
    return rep;
}

// ---------------------------------------------------------------------------
// Area and centre of gravity
// ---------------------------------------------------------------------------

// |outer| minus the inner loop areas.
inline double profile_area(const Profile& p)
{
    double a = 0.0;
    for (std::size_t i = 0; i < p.loops.size(); ++i) {
        const double la = std::abs(loop_signed_area(p.loops[i]));
        a += i == 0 ? la : -la;
    }
    return a;
}

// Centroid of the region, from boundaries discretized with sagitta 1e-4.
inline Point2 profile_cog(const Profile& p, double sagitta = 1e-4)
{
    double area = 0.0;
    Point2 moment;
    for (std::size_t i = 0; i < p.loops.size(); ++i) {
        const auto poly = discretize(p.loops[i], sagitta);
        double a = 0.0;
        Point2 m;
        for (std::size_t k = 0; k < poly.size(); ++k) {
            const Point2 u = poly[k];
            const Point2 v = poly[(k + 1) % poly.size()];
            const double c = cross(u, v);
            a += 0.5 * c;
            m = m + (c / 6.0) * (u + v);
        }
        const double sign = (i == 0 ? 1.0 : -1.0) * (a < 0 ? -1.0 : 1.0);
        area += sign * a;
        moment = moment + sign * m;
    }
    if (std::abs(area) < 1e-300) return {};
    return (1.0 / area) * moment;
}

// ---------------------------------------------------------------------------
// Prompt satisfaction
// ---------------------------------------------------------------------------

struct LineSegmentScore {
    std::optional<double> distance;  // mean end point distance over matches
    std::optional<double> ratio;     // matched / requested
};

// A profile segment matches a requested one when it is collinear (1 degree,
// 1/127), overlaps it and has the same length within 1/127.
inline std::optional<double> segment_match_distance(const LineSegment& req, const LineSegment& got)
{
    const double lr = req.length();
    const double lg = got.length();
    if (lr <= 0.0 || lg <= 0.0) return std::nullopt;
    const DirectedLine cr = req.carrier();
    const DirectedLine cg = got.carrier();
    if (direction_gap(cr.phi, cg.phi) > kAngleTol) return std::nullopt;
    if (std::abs(cr.signed_distance(got.start)) > kLengthTol || std::abs(cr.signed_distance(got.end)) > kLengthTol)
        return std::nullopt;
    if (std::abs(lr - lg) > kLengthTol) return std::nullopt;
    const Point2 t = cr.direction();
    double g0 = dot(got.start - req.start, t);
    double g1 = dot(got.end - req.start, t);
    if (g0 > g1) std::swap(g0, g1);
    if (std::min(lr, g1) - std::max(0.0, g0) <= 0.0) return std::nullopt;
    const double same = 0.5 * (distance(req.start, got.start) + distance(req.end, got.end));
    const double flip = 0.5 * (distance(req.start, got.end) + distance(req.end, got.start));
    return std::min(same, flip);
}

inline LineSegmentScore line_segment_metrics(const std::vector<LineSegment>& requested, const Profile& p)
{
    LineSegmentScore s;
    if (requested.empty()) return s;
    std::vector<LineSegment> segs;
    for (const auto& loop : p.loops)
        for (const auto& c : loop.curves)
            if (const auto* l = std::get_if<LineSegment>(&c)) segs.push_back(*l);
    double sum = 0.0;
    int matched = 0;
    for (const auto& r : requested) {
        std::optional<double> best;
        for (const auto& g : segs)
            if (auto d = segment_match_distance(r, g); d && (!best || *d < *best)) best = d;
        if (best) {
            sum += *best;
            ++matched;
        }
    }
    s.ratio = static_cast<double>(matched) / static_cast<double>(requested.size());
    if (matched > 0) s.distance = sum / matched;
    return s;
}

// Even-odd raster of closed polygons on an n x n grid over [-0.5, 0.5]^2.
class Raster {
public:
    explicit Raster(int n = 1024) : n_(n), cells_(static_cast<std::size_t>(n) * n, 0) {}

    int size() const { return n_; }
    bool at(int ix, int iy) const { return cells_[static_cast<std::size_t>(iy) * n_ + ix] != 0; }

    void fill(const std::vector<std::vector<Point2>>& polys)
    {
        const double h = 1.0 / n_;
        std::vector<double> xs;
        for (int iy = 0; iy < n_; ++iy) {
            const double y = -0.5 + (iy + 0.5) * h;
            xs.clear();
            for (const auto& poly : polys) {
                for (std::size_t k = 0; k < poly.size(); ++k) {
                    const Point2 a = poly[k];
                    const Point2 b = poly[(k + 1) % poly.size()];
                    if ((a.y <= y) == (b.y <= y)) continue;
                    xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
            std::sort(xs.begin(), xs.end());
            for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
                // Cell centres strictly inside [x0, x1).
                const int i0 = std::max(0, static_cast<int>(std::ceil((xs[k] + 0.5) / h - 0.5)));
                const int i1 = std::min(n_ - 1, static_cast<int>(std::ceil((xs[k + 1] + 0.5) / h - 0.5)) - 1);
                for (int ix = i0; ix <= i1; ++ix) cells_[static_cast<std::size_t>(iy) * n_ + ix] ^= 1;
            }
        }
    }

    static double iou(const Raster& a, const Raster& b)
    {
        std::int64_t inter = 0;
        std::int64_t uni = 0;
        for (std::size_t i = 0; i < a.cells_.size(); ++i) {
            inter += a.cells_[i] & b.cells_[i];
            uni += a.cells_[i] | b.cells_[i];
        }
        return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }

private:
    int n_;
    std::vector<std::uint8_t> cells_;
};

inline std::vector<std::vector<Point2>> polygons_of(const Profile& p, double sagitta = 1e-3)
{
    std::vector<std::vector<Point2>> out;
    for (const auto& loop : p.loops) out.push_back(discretize(loop, sagitta));
    return out;
}

inline double raster_iou(const Profile& a, const Profile& b, int n = 1024)
{
    Raster ra(n), rb(n);
    ra.fill(polygons_of(a));
    rb.fill(polygons_of(b));
    return Raster::iou(ra, rb);
}

// Mean IoU of the profile and its mirror image over the given lines; absent
// when there are none.
inline std::optional<double> mirror_iou(const Profile& p, const std::vector<DirectedLine>& sym_lines, int n = 1024)
{
    if (sym_lines.empty()) return std::nullopt;
    const auto polys = polygons_of(p);
    Raster base(n);
    base.fill(polys);
    double sum = 0.0;
    for (const auto& s : sym_lines) {
        auto mirrored = polys;
        for (auto& poly : mirrored)
            for (auto& q : poly) q = point_sym_point(q, s);
        Raster r(n);
        r.fill(mirrored);
        sum += Raster::iou(base, r);
    }
    return sum / static_cast<double>(sym_lines.size());
}

inline double bbox_iou(const BoundingBox& a, const BoundingBox& b)
{
    const double ix = std::max(0.0, std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x));
    const double iy = std::max(0.0, std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni <= 0.0 ? 0.0 : inter / uni;
}

// Fraction of loop vertices where the tangents agree within 1 degree.
// A profile made only of circles has no vertices and scores 1.
inline double smooth_fraction(const Profile& p)
{
    int total = 0;
    int smooth = 0;
    for (const auto& loop : p.loops) {
        if (loop.is_circle()) continue;
        const std::size_t n = loop.curves.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Curve& a = loop.curves[i];
            const Curve& b = loop.curves[(i + 1) % n];
            ++total;
            try {
                const Point2 ta = curve_tangent(a, 1.0);
                const Point2 tb = curve_tangent(b, 0.0);
                const double ang = std::atan2(std::abs(cross(ta, tb)), dot(ta, tb));
                if (ang <= kAngleTol) ++smooth;
            } catch (const NoSolution&) {
            }
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(smooth) / total;
}

// Mean distance from each requested hole to the nearest circular inner loop;
// a missing hole counts `penalty`. Absent when no holes are requested.
inline std::optional<double> hole_center_distance(const std::vector<BoltHole>& holes, const Profile& p,
                                                  double penalty = 1.0)
{
    if (holes.empty()) return std::nullopt;
    std::vector<Point2> centers;
    for (std::size_t i = 1; i < p.loops.size(); ++i)
        if (p.loops[i].is_circle()) centers.push_back(p.loops[i].circle->center);
    double sum = 0.0;
    for (const auto& h : holes) {
        double best = penalty;
        for (Point2 c : centers) best = std::min(best, distance(c, h.center));
        sum += best;
    }
    return sum / static_cast<double>(holes.size());
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ValidityReport {
    bool syntactic_valid = false;
    bool self_intersection_free = false;
    bool no_short_edges = false;
    std::vector<Point2> intersection_points;
    std::vector<CurveRef> short_edges;
};

inline ValidityReport validity_of(const Profile& p)
{
    ValidityReport v;
    v.syntactic_valid = true;
    auto si = check_self_intersection(p);
    v.self_intersection_free = si.intersection_free;
    v.intersection_points = std::move(si.points);
    auto se = check_short_edges(p);
    v.no_short_edges = se.ok;
    v.short_edges = std::move(se.offenders);
    return v;
}

struct PromptScore {
    double area_diff = 0.0;
    std::optional<double> line_segment_dist;
    std::optional<double> line_segment_ratio;
    double cog_dist = 0.0;
    std::optional<double> hole_center_dist;
    std::optional<double> mirror_iou;
    double bbox_iou = 0.0;
    double smooth_fraction_diff = 0.0;
};

struct MetricsConfig {
    double missing_hole_penalty = 1.0;
    int raster = 1024;
};

inline PromptScore score_prompt(const GeometricPrompt& prompt, const Profile& p, const MetricsConfig& cfg = {})
{
    PromptScore s;
    s.area_diff = std::abs(profile_area(p) - prompt.area);
    const auto ls = line_segment_metrics(prompt.bound_lines, p);
    s.line_segment_dist = ls.distance;
    s.line_segment_ratio = ls.ratio;
    s.cog_dist = distance(profile_cog(p), prompt.cog);
    s.hole_center_dist = hole_center_distance(prompt.bolt_holes, p, cfg.missing_hole_penalty);
    s.mirror_iou = mirror_iou(p, prompt.symmetry_lines, cfg.raster);
    s.bbox_iou = bbox_iou(prompt.bbox, bounding_box(p));
    s.smooth_fraction_diff = std::abs(smooth_fraction(p) - prompt.smooth_fraction);
    return s;
}

inline const std::vector<std::string>& report_columns()
{
    static const std::vector<std::string> cols = {
        "Syntactic validity",         "No self-intersection",  "No short edges",
        "Difference in area",         "Line segment dist",     "Line segment ratio",
        "Center-of-gravity distance", "Hole center dist",      "Mirror IoU",
        "Outer bounding box IoU",     "Tangent continuous vertices difference",
    };
    return cols;
}

// ---------------------------------------------------------------------------
// Per-step residuals
// ---------------------------------------------------------------------------

struct ResidualStats {
    std::size_t count = 0;
    double mean = 0.0;
    double max = 0.0;
};

inline double geometry_residual(const Geometry& a, const Geometry& b)
{
    if (a.index() != b.index()) return std::numeric_limits<double>::infinity();
    if (const auto* p = std::get_if<Point2>(&a)) return distance(*p, std::get<Point2>(b));
    if (const auto* l = std::get_if<DirectedLine>(&a)) {
        const auto& m = std::get<DirectedLine>(b);
        return std::max(std::abs(l->d - m.d), angle_between(l->phi, m.phi));
    }
    const auto& c = std::get<OrientedCircle>(a);
    const auto& e = std::get<OrientedCircle>(b);
    const double flag = c.ccw == e.ccw ? 0.0 : 1.0;
    return std::max({distance(c.center, e.center), std::abs(c.radius - e.radius), flag});
}

// Recomputes each recorded step from its recorded inputs and measures how far
// the recorded outputs are from the kernel's answer.
inline std::map<StepKind, ResidualStats> step_residuals(const ReplayTrace& trace)
{
    std::map<StepKind, ResidualStats> out;
    for (const auto& rec : trace) {
        if (rec.is_curve || !rec.kind || rec.status != StepStatus::Ok) continue;
        std::vector<Value> in;
        bool complete = true;
        for (const auto& v : rec.inputs) {
            if (!v) complete = false;
            else in.push_back(*v);
        }
        if (!complete) continue;
        Step st;
        st.kind = *rec.kind;
        if (st.kind == StepKind::PointRadiusCircle && !rec.outputs.empty() && rec.outputs[0])
            if (const auto* c = std::get_if<OrientedCircle>(&*rec.outputs[0])) st.ccw = c->ccw;
        double r = 0.0;
        try {
            const auto expect = detail::execute_step(st, in);
            for (std::size_t k = 0; k < expect.size() && k < rec.outputs.size(); ++k)
                if (rec.outputs[k]) r = std::max(r, geometry_residual(expect[k], *rec.outputs[k]));
        } catch (const NoSolution&) {
            r = std::numeric_limits<double>::infinity();
        }
        auto& s = out[st.kind];
        s.mean = (s.mean * static_cast<double>(s.count) + r) / static_cast<double>(s.count + 1);
        s.max = std::max(s.max, r);
        ++s.count;
    }
    return out;
}

}  // namespace pforge
