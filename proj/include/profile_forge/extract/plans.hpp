#pragma once

// Source lines and the offset chains built from them.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include "../errors.hpp"
#include "../geometry.hpp"
#include "../sequence.hpp"
#include "graph.hpp"
#include "relations.hpp"

namespace pforge {

struct AxisRotation {
    bool from_x_axis = true;
    double angle = 0.0;  // in [0, 2pi)
    DirectedLine result;
};

struct SourceLines {
    std::vector<DirectedLine> lines;
    std::vector<AxisRotation> rotations;
};

// Symmetry lines, bound-line carriers and the datum axes, plus one rotated
// datum axis for every direction none of them covers.
inline SourceLines identify_source_lines(const GeometricPrompt& prompt, const std::vector<double>& directions)
{
    SourceLines s;
    s.lines.push_back(prompt.datum_x_axis());
    s.lines.push_back(prompt.datum_y_axis());
    for (const auto& l : prompt.symmetry_lines) s.lines.push_back(l);
    for (const auto& b : prompt.bound_lines) s.lines.push_back(b.carrier());
    auto covered = [&](double a) {
        for (const auto& l : s.lines)
            if (undirected_gap(l.phi, a) <= kAngleTol) return true;
        for (const auto& r : s.rotations)
            if (undirected_gap(r.result.phi, a) <= kAngleTol) return true;
        return false;
    };
    for (double a : directions) {
        if (covered(a)) continue;
        const double t = std::fmod(normalize_angle(a), kPi);  // [0, pi)
        const bool from_x = std::min(t, kPi - t) <= std::abs(t - kPi / 2);
        const DirectedLine axis = from_x ? prompt.datum_x_axis() : prompt.datum_y_axis();
        double rot = t - axis.phi;  // fold into (-pi/2, pi/2]
        if (rot > kPi / 2) rot -= kPi;
        if (rot <= -kPi / 2) rot += kPi;
        const double stored = normalize_angle(rot);
        s.rotations.push_back({from_x, stored, line_axis_rotated_line(axis, prompt.datum, stored)});
    }
    return s;
}

namespace detail {

// Offsets along a spanning tree of `pos`. Positions flagged available are
// merged into one root; edges are deleted least-frequent first (longer first
// among equals) while the graph stays connected, and the survivors are
// walked in Dijkstra order from the root. Returns (parent, child) pairs in
// creation order; parent -1 is the root and `anchor` gives the nearest
// available position for those.
struct TreeEdge {
    int parent;
    int child;
};

inline std::vector<TreeEdge> offset_tree(const std::vector<double>& pos, const std::vector<bool>& available,
                                         const DistanceFrequencies& freqs)
{
    const int n = static_cast<int>(pos.size());
    // vertex 0 is the merged root, vertex i + 1 is position i
    auto vid = [&](int i) { return available[static_cast<std::size_t>(i)] ? 0 : i + 1; };
    struct Edge {
        int a, b;
        double w;
        int freq;
        bool alive = true;
    };
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (available[static_cast<std::size_t>(i)] && available[static_cast<std::size_t>(j)]) continue;
            const double w = std::abs(pos[static_cast<std::size_t>(i)] - pos[static_cast<std::size_t>(j)]);
            edges.push_back({i, j, w, freqs.count(w)});
        }
    std::vector<std::size_t> order(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (edges[x].freq != edges[y].freq) return edges[x].freq < edges[y].freq;
        if (std::abs(edges[x].w - edges[y].w) > 1e-12) return edges[x].w > edges[y].w;
        return x < y;
    });

    auto connected = [&]() {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(n) + 1);
        for (const auto& e : edges)
            if (e.alive) {
                adj[static_cast<std::size_t>(vid(e.a))].push_back(vid(e.b));
                adj[static_cast<std::size_t>(vid(e.b))].push_back(vid(e.a));
            }
        std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
        std::vector<int> st = {0};
        seen[0] = true;
        while (!st.empty()) {
            const int v = st.back();
            st.pop_back();
            for (int w : adj[static_cast<std::size_t>(v)])
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    st.push_back(w);
                }
        }
        for (int i = 0; i < n; ++i)
            if (!seen[static_cast<std::size_t>(vid(i))]) return false;
        return true;
    };
    if (!connected()) return {};
    for (std::size_t k : order) {
        edges[k].alive = false;
        if (!connected()) edges[k].alive = true;
    }

    // Dijkstra from the merged root over surviving edges.
    std::vector<double> dist(static_cast<std::size_t>(n), kInfiniteCost);
    std::vector<int> parent(static_cast<std::size_t>(n), -2);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> q;
    for (int i = 0; i < n; ++i)
        if (available[static_cast<std::size_t>(i)]) {
            dist[static_cast<std::size_t>(i)] = 0.0;
            parent[static_cast<std::size_t>(i)] = -1;
            q.push({0.0, i});
        }
    std::vector<TreeEdge> out;
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    while (!q.empty()) {
        const auto [d, v] = q.top();
        q.pop();
        if (done[static_cast<std::size_t>(v)]) continue;
        done[static_cast<std::size_t>(v)] = true;
        if (!available[static_cast<std::size_t>(v)]) out.push_back({parent[static_cast<std::size_t>(v)], v});
        for (const auto& e : edges) {
            if (!e.alive || (e.a != v && e.b != v)) continue;
            const int w = e.a == v ? e.b : e.a;
            if (available[static_cast<std::size_t>(w)]) continue;
            const double nd = d + e.w;
            if (nd < dist[static_cast<std::size_t>(w)] - 1e-15) {
                dist[static_cast<std::size_t>(w)] = nd;
                parent[static_cast<std::size_t>(w)] = v;
                q.push({nd, w});
            }
        }
    }
    return out;
}

inline const DirectedLine& line_of(const DataflowGraph& g, int n) { return std::get<DirectedLine>(g.value(n)); }

}  // namespace detail

// Adds offset steps that build every line of one parallel group from the
// sources. Lines paired about a symmetry source come from a symmetric
// offset; the rest follow the offset tree. Returns the new step ids.
inline std::vector<int> plan_parallel_offsets(DataflowGraph& g, const std::vector<int>& targets,
                                              const std::vector<int>& sources, const std::vector<int>& symmetry,
                                              const DistanceFrequencies& freqs)
{
    if (sources.empty()) throw UnreachableGroup("no source line is parallel to the group");
    const DirectedLine ref = detail::line_of(g, sources.front());
    auto pos_of = [&](int n) { return position_along(detail::line_of(g, n), ref); };

    struct Slot {
        double pos;
        std::vector<int> nodes;
        bool available;
        int carrier = -1;  // node whose line sits here, once known
    };
    std::vector<Slot> slots;
    auto slot_at = [&](double p) -> int {
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (std::abs(slots[i].pos - p) <= kNodeTol) return static_cast<int>(i);
        return -1;
    };
    for (int s : sources) {
        const double p = pos_of(s);
        if (slot_at(p) < 0) slots.push_back({p, {s}, true, s});
    }
    for (int t : targets) {
        const double p = pos_of(t);
        const int k = slot_at(p);
        if (k >= 0)
            slots[static_cast<std::size_t>(k)].nodes.push_back(t);
        else
            slots.push_back({p, {t}, false, -1});
    }

    std::vector<int> made;
    // target node at slot k whose direction matches `dir`, if any
    auto target_with_dir = [&](const Slot& sl, double phi) -> std::optional<int> {
        for (int n : sl.nodes)
            if (angle_between(detail::line_of(g, n).phi, phi) <= kAngleTol) return n;
        return std::nullopt;
    };

    for (int s : symmetry) {
        const DirectedLine sym = detail::line_of(g, s);
        const double sp = pos_of(s);
        const double side = dot(sym.normal(), ref.normal()) > 0 ? 1.0 : -1.0;
        for (std::size_t a = 0; a < slots.size(); ++a) {
            if (slots[a].available) continue;
            const double o = std::abs(slots[a].pos - sp);
            if (o <= kLengthTol) continue;
            const int b = slot_at(2.0 * sp - slots[a].pos);
            if (b < 0 || slots[static_cast<std::size_t>(b)].available || static_cast<std::size_t>(b) == a) continue;
            const std::array<DirectedLine, 2> outs = sym_line_offset_line_line(sym, o);
            // first output lies on the left of sym
            const std::size_t left = side * (slots[a].pos - sp) > 0 ? a : static_cast<std::size_t>(b);
            const std::size_t right = left == a ? static_cast<std::size_t>(b) : a;
            const int p = g.param(ParamKind::Length, o);
            auto id = g.add_step(StepKind::SymLineOffsetLineLine, {InputRef::geom(s), InputRef::parameter(p)}, true,
                                 {target_with_dir(slots[left], outs[0].phi), target_with_dir(slots[right], outs[1].phi)});
            if (!id) continue;
            made.push_back(*id);
            const auto& st = g.steps[static_cast<std::size_t>(*id)];
            slots[left].available = slots[right].available = true;
            slots[left].carrier = st.outputs[0];
            slots[right].carrier = st.outputs[1];
        }
    }

    std::vector<double> pos;
    std::vector<bool> avail;
    for (const auto& sl : slots) {
        pos.push_back(sl.pos);
        avail.push_back(sl.available && sl.carrier >= 0);
    }
    const auto tree = detail::offset_tree(pos, avail, freqs);
    for (const auto& e : tree) {
        auto& child = slots[static_cast<std::size_t>(e.child)];
        int from = -1;
        if (e.parent >= 0) {
            from = slots[static_cast<std::size_t>(e.parent)].carrier;
        } else {
            // nearest available slot
            double best = kInfiniteCost;
            for (const auto& sl : slots)
                if (sl.available && sl.carrier >= 0 && std::abs(sl.pos - child.pos) < best) {
                    best = std::abs(sl.pos - child.pos);
                    from = sl.carrier;
                }
        }
        if (from < 0) continue;
        const DirectedLine fl = detail::line_of(g, from);
        const double sign = dot(fl.normal(), ref.normal()) > 0 ? 1.0 : -1.0;
        const double o = sign * (child.pos - position_along(fl, ref));
        const int p = g.param(ParamKind::Length, o);
        auto id = g.add_step(StepKind::LineOffsetLine, {InputRef::geom(from), InputRef::parameter(p)}, true,
                             {target_with_dir(child, fl.phi)});
        if (!id) continue;
        made.push_back(*id);
        child.carrier = g.steps[static_cast<std::size_t>(*id)].outputs[0];
        child.available = true;
    }
    return made;
}

// Builds a concentric group: the first circle from a prompt circle or from
// the centre with the most frequent radius, the rest by offsets.
inline std::vector<int> plan_concentric_offsets(DataflowGraph& g, int center, const std::vector<int>& circles,
                                                const DistanceFrequencies& freqs)
{
    const Point2 c = std::get<Point2>(g.value(center));
    struct Ring {
        double r;
        std::vector<int> nodes;
        bool available = false;
        int carrier = -1;
    };
    std::vector<Ring> rings;
    auto ring_at = [&](double r) -> int {
        for (std::size_t i = 0; i < rings.size(); ++i)
            if (std::abs(rings[i].r - r) <= kNodeTol) return static_cast<int>(i);
        return -1;
    };
    auto add = [&](int n) {
        const auto& oc = std::get<OrientedCircle>(g.value(n));
        const int k = ring_at(oc.radius);
        if (k < 0)
            rings.push_back({oc.radius, {n}});
        else
            rings[static_cast<std::size_t>(k)].nodes.push_back(n);
        return ring_at(oc.radius);
    };
    for (int n : circles) add(n);
    for (std::size_t i = 0; i < g.geoms.size(); ++i) {
        const auto* oc = std::get_if<OrientedCircle>(&g.geoms[i].value);
        if (!oc || !g.geoms[i].is_prompt() || distance(oc->center, c) > kNodeTol) continue;
        const int k = add(static_cast<int>(i));
        rings[static_cast<std::size_t>(k)].available = true;
        rings[static_cast<std::size_t>(k)].carrier = static_cast<int>(i);
    }
    if (rings.empty()) return {};

    std::vector<int> made;
    if (std::none_of(rings.begin(), rings.end(), [](const Ring& r) { return r.available; })) {
        std::size_t root = 0;
        for (std::size_t i = 1; i < rings.size(); ++i) {
            const int fi = freqs.count(rings[i].r), fr = freqs.count(rings[root].r);
            if (fi > fr || (fi == fr && rings[i].r < rings[root].r)) root = i;
        }
        const bool ccw = std::get<OrientedCircle>(g.value(rings[root].nodes.front())).ccw;
        const int p = g.param(ParamKind::Length, rings[root].r);
        auto id = g.add_step(StepKind::PointRadiusCircle, {InputRef::geom(center), InputRef::parameter(p)}, ccw,
                             {rings[root].nodes.front()});
        if (!id) return made;
        made.push_back(*id);
        rings[root].available = true;
        rings[root].carrier = g.steps[static_cast<std::size_t>(*id)].outputs[0];
    }

    std::vector<double> pos;
    std::vector<bool> avail;
    for (const auto& r : rings) {
        pos.push_back(r.r);
        avail.push_back(r.available);
    }
    const auto tree = detail::offset_tree(pos, avail, freqs);
    for (const auto& e : tree) {
        auto& child = rings[static_cast<std::size_t>(e.child)];
        const Ring* parent = nullptr;
        if (e.parent >= 0) {
            parent = &rings[static_cast<std::size_t>(e.parent)];
        } else {
            double best = kInfiniteCost;
            for (const auto& r : rings)
                if (r.available && std::abs(r.r - child.r) < best) {
                    best = std::abs(r.r - child.r);
                    parent = &r;
                }
        }
        if (!parent || parent->carrier < 0) continue;
        // shrinking needs a counter-clockwise input, growing a clockwise one
        const bool ccw = child.r < parent->r;
        const int input = g.node(OrientedCircle{c, parent->r, ccw});
        std::optional<int> target;
        for (int n : child.nodes)
            if (std::get<OrientedCircle>(g.value(n)).ccw == ccw) target = n;
        const int p = g.param(ParamKind::Length, std::abs(child.r - parent->r));
        auto id = g.add_step(StepKind::CircleOffsetCircle, {InputRef::geom(input), InputRef::parameter(p)}, true, {target});
        if (!id) continue;
        made.push_back(*id);
        child.available = true;
        child.carrier = g.steps[static_cast<std::size_t>(*id)].outputs[0];
    }
    return made;
}

}  // namespace pforge
