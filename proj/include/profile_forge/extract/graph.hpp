#pragma once

// Bipartite dataflow graph used by the extractor: geometry nodes, step nodes
// and parameter nodes, plus the completion, cycle breaking, pruning and
// ordering passes that turn it into a program.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "../errors.hpp"
#include "../geometry.hpp"
#include "../sequence.hpp"
#include "../tokens.hpp"
#include "../vm.hpp"

namespace pforge {

// Values closer than this are the same node.
inline constexpr double kNodeTol = 1e-6;
// A planned step may claim a target node whose value it reproduces this closely.
inline constexpr double kAttachTol = 0.25 / 127.0;

inline bool geometry_close(const Geometry& a, const Geometry& b, double tol)
{
    if (a.index() != b.index()) return false;
    if (const auto* p = std::get_if<Point2>(&a)) return distance(*p, std::get<Point2>(b)) <= tol;
    if (const auto* l = std::get_if<DirectedLine>(&a)) {
        const auto& m = std::get<DirectedLine>(b);
        return angle_between(l->phi, m.phi) <= tol && std::abs(l->d - m.d) <= tol;
    }
    const auto& c = std::get<OrientedCircle>(a);
    const auto& e = std::get<OrientedCircle>(b);
    return c.ccw == e.ccw && distance(c.center, e.center) <= tol && std::abs(c.radius - e.radius) <= tol;
}

inline bool encodable(const Geometry& g)
{
    try {
        (void)encode_geometry(g);
        return true;
    } catch (const OutOfRange&) {
        return false;
    }
}

// Higher wins ties in pruning and survives cycle breaking longer.
inline int step_priority(StepKind k)
{
    switch (k) {
    case StepKind::LineLineFillet: return 4;
    case StepKind::LineCircleParallelLine: return 3;
    case StepKind::LineXCircle: return 2;
    case StepKind::PointLineSymPoint:
    case StepKind::LineSymLineLine: return 1;
    default: return 0;
    }
}

inline constexpr double kStepCost = 0.1;
inline constexpr double kParameterCost = 1.0;
inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct InputRef {
    bool param = false;
    int id = 0;

    static InputRef geom(int i) { return {false, i}; }
    static InputRef parameter(int i) { return {true, i}; }
};

struct GeomNode {
    Geometry value;
    int prompt_register = -1;
    bool required = false;
    std::vector<std::pair<int, int>> in;  // active (step, output slot) edges

    bool is_prompt() const { return prompt_register >= 0; }
};

struct ParamNode {
    ParamKind kind = ParamKind::Length;
    double value = 0.0;
};

struct StepNode {
    StepKind kind = StepKind::LineXLine;
    std::vector<InputRef> inputs;
    std::vector<int> outputs;  // geometry node per slot, -1 for a throwaway value
    std::vector<bool> active;  // slot edge present in the graph
    bool ccw = true;
    bool removed = false;
};

class DataflowGraph {
public:
    std::vector<GeomNode> geoms;
    std::vector<ParamNode> params;
    std::vector<StepNode> steps;
    std::set<std::pair<int, int>> essential;

    int find(const Geometry& g, double tol = kNodeTol) const
    {
        for (std::size_t i = 0; i < geoms.size(); ++i)
            if (geometry_close(geoms[i].value, g, tol)) return static_cast<int>(i);
        return -1;
    }

    int node(const Geometry& g)
    {
        const int f = find(g);
        if (f >= 0) return f;
        geoms.push_back({g, -1, false, {}});
        return static_cast<int>(geoms.size()) - 1;
    }

    // Registers are added in prompt order; the latest one with a given
    // geometry is the one references resolve to, and any earlier register
    // sharing its encoding becomes unreachable by reference.
    int add_prompt_register(const Geometry& g, int reg)
    {
        const Encoding e = encode_geometry(g);
        const int n = node(g);
        for (std::size_t i = 0; i < geoms.size(); ++i)
            if (static_cast<int>(i) != n && geoms[i].is_prompt() && encode_geometry(geoms[i].value) == e)
                geoms[i].prompt_register = -1;
        geoms[static_cast<std::size_t>(n)].prompt_register = reg;
        return n;
    }

    int param(ParamKind k, double v)
    {
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].kind == k && std::abs(params[i].value - v) <= kNodeTol) return static_cast<int>(i);
        params.push_back({k, v});
        return static_cast<int>(params.size()) - 1;
    }

    // Geometry for a prompt-or-produced node, NaN-free.
    const Geometry& value(int g) const { return geoms[static_cast<std::size_t>(g)].value; }

    // Evaluates the step on the node values and wires its outputs. A target
    // for a slot is claimed when the computed value lies within kAttachTol of
    // it; other outputs bind to the node with the same value. Returns nothing
    // when the step has no solution or an output cannot be encoded.
    std::optional<int> add_step(StepKind kind, const std::vector<InputRef>& inputs, bool ccw = true,
                                const std::vector<std::optional<int>>& targets = {})
    {
        std::ostringstream key;
        key << static_cast<int>(kind) << (ccw ? '+' : '-');
        for (const auto& in : inputs) key << (in.param ? 'p' : 'g') << in.id << ',';
        if (auto it = step_keys_.find(key.str()); it != step_keys_.end()) return it->second;

        std::vector<Value> vals;
        for (const auto& in : inputs) {
            if (in.param)
                vals.emplace_back(params[static_cast<std::size_t>(in.id)].value);
            else
                vals.push_back(detail::to_value(value(in.id)));
        }
        std::vector<Geometry> outs;
        try {
            outs = detail::execute_step(Step{kind, {}, {}, ccw}, vals);
        } catch (const NoSolution&) {
            return std::nullopt;
        }
        for (const auto& o : outs)
            if (!encodable(o)) return std::nullopt;

        StepNode s;
        s.kind = kind;
        s.inputs = inputs;
        s.ccw = ccw;
        for (std::size_t k = 0; k < outs.size(); ++k) {
            int n = -1;
            if (k < targets.size() && targets[k] && geometry_close(outs[k], value(*targets[k]), kAttachTol))
                n = *targets[k];
            if (n < 0) n = node(outs[k]);
            const bool feeds_itself = std::any_of(inputs.begin(), inputs.end(),
                                                  [&](const InputRef& in) { return !in.param && in.id == n; });
            s.outputs.push_back(feeds_itself ? -1 : n);
        }
        for (std::size_t k = 0; k < s.outputs.size(); ++k)
            for (std::size_t j = k + 1; j < s.outputs.size(); ++j)
                if (s.outputs[k] == s.outputs[j]) s.outputs[k] = -1;
        const int id = static_cast<int>(steps.size());
        s.active.assign(s.outputs.size(), false);
        for (std::size_t k = 0; k < s.outputs.size(); ++k) {
            const int n = s.outputs[k];
            if (n < 0 || geoms[static_cast<std::size_t>(n)].is_prompt()) continue;
            s.active[k] = true;
            geoms[static_cast<std::size_t>(n)].in.emplace_back(id, static_cast<int>(k));
        }
        steps.push_back(std::move(s));
        step_keys_[key.str()] = id;
        return id;
    }

    void deactivate(int step, int slot)
    {
        auto& s = steps[static_cast<std::size_t>(step)];
        if (!s.active[static_cast<std::size_t>(slot)]) return;
        s.active[static_cast<std::size_t>(slot)] = false;
        auto& in = geoms[static_cast<std::size_t>(s.outputs[static_cast<std::size_t>(slot)])].in;
        in.erase(std::remove(in.begin(), in.end(), std::make_pair(step, slot)), in.end());
    }

    void remove_step(int step)
    {
        auto& s = steps[static_cast<std::size_t>(step)];
        for (std::size_t k = 0; k < s.outputs.size(); ++k) deactivate(step, static_cast<int>(k));
        s.removed = true;
    }

    // Steps consuming each geometry node.
    std::vector<std::vector<int>> consumers() const
    {
        std::vector<std::vector<int>> c(geoms.size());
        for (std::size_t s = 0; s < steps.size(); ++s) {
            if (steps[s].removed) continue;
            for (const auto& in : steps[s].inputs)
                if (!in.param) c[static_cast<std::size_t>(in.id)].push_back(static_cast<int>(s));
        }
        for (auto& v : c) v.erase(std::unique(v.begin(), v.end()), v.end());
        return c;
    }

    // Nodes derivable from the prompt through live steps.
    std::vector<bool> reachable() const
    {
        std::vector<bool> r(geoms.size(), false);
        for (std::size_t i = 0; i < geoms.size(); ++i) r[i] = geoms[i].is_prompt();
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& s : steps) {
                if (s.removed) continue;
                const bool ready = std::all_of(s.inputs.begin(), s.inputs.end(), [&](const InputRef& in) {
                    return in.param || r[static_cast<std::size_t>(in.id)];
                });
                if (!ready) continue;
                for (std::size_t k = 0; k < s.outputs.size(); ++k)
                    if (s.active[k] && !r[static_cast<std::size_t>(s.outputs[k])]) {
                        r[static_cast<std::size_t>(s.outputs[k])] = true;
                        changed = true;
                    }
            }
        }
        return r;
    }

    std::size_t live_step_count() const
    {
        return static_cast<std::size_t>(
            std::count_if(steps.begin(), steps.end(), [](const StepNode& s) { return !s.removed; }));
    }

private:
    std::map<std::string, int> step_keys_;
};

// Gives every geometry node that the prompt cannot yet reach a reversing
// step or, for circles with a known centre, a centre-and-radius step.
inline void complete_graph(DataflowGraph& g)
{
    for (;;) {
        const auto reach = g.reachable();
        const std::size_t before = g.steps.size();
        const std::size_t n = g.geoms.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (reach[i]) continue;
            const Geometry v = g.geoms[i].value;
            const auto target = std::vector<std::optional<int>>{static_cast<int>(i)};
            if (const auto* l = std::get_if<DirectedLine>(&v)) {
                const int r = g.find(line_reverse(*l));
                if (r >= 0 && reach[static_cast<std::size_t>(r)])
                    g.add_step(StepKind::LineReverseLine, {InputRef::geom(r)}, true, target);
            } else if (const auto* c = std::get_if<OrientedCircle>(&v)) {
                const int r = g.find(circle_reverse(*c));
                if (r >= 0 && reach[static_cast<std::size_t>(r)])
                    g.add_step(StepKind::CircleReverseCircle, {InputRef::geom(r)}, true, target);
                const int ctr = g.find(c->center);
                if (ctr >= 0 && reach[static_cast<std::size_t>(ctr)]) {
                    const int p = g.param(ParamKind::Length, c->radius);
                    g.add_step(StepKind::PointRadiusCircle, {InputRef::geom(ctr), InputRef::parameter(p)}, c->ccw,
                               target);
                }
            }
        }
        if (g.steps.size() == before) return;
    }
}

namespace detail {

// Marks edges that are the only provenance along a chain from required geometry.
inline void mark_essential(DataflowGraph& g)
{
    g.essential.clear();
    std::vector<bool> seen(g.geoms.size(), false);
    std::vector<int> stack;
    for (std::size_t i = 0; i < g.geoms.size(); ++i)
        if (g.geoms[i].required) stack.push_back(static_cast<int>(i));
    while (!stack.empty()) {
        const int n = stack.back();
        stack.pop_back();
        if (seen[static_cast<std::size_t>(n)]) continue;
        seen[static_cast<std::size_t>(n)] = true;
        const auto& gn = g.geoms[static_cast<std::size_t>(n)];
        if (gn.is_prompt() || gn.in.size() != 1) continue;
        g.essential.insert(gn.in.front());
        for (const auto& in : g.steps[static_cast<std::size_t>(gn.in.front().first)].inputs)
            if (!in.param) stack.push_back(in.id);
    }
}

inline constexpr int kUnreached = std::numeric_limits<int>::max() / 2;

// Unit-weight hop counts from the prompt to every geometry node.
inline std::vector<int> hops_from_prompt(const DataflowGraph& g, const std::vector<std::vector<int>>& cons)
{
    std::vector<int> gh(g.geoms.size(), kUnreached), sh(g.steps.size(), kUnreached);
    std::vector<int> queue;
    for (std::size_t i = 0; i < g.geoms.size(); ++i)
        if (g.geoms[i].is_prompt()) {
            gh[i] = 0;
            queue.push_back(static_cast<int>(i));
        }
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const int n = queue[q];
        for (int s : cons[static_cast<std::size_t>(n)]) {
            if (sh[static_cast<std::size_t>(s)] != kUnreached) continue;
            sh[static_cast<std::size_t>(s)] = gh[static_cast<std::size_t>(n)] + 1;
            const auto& st = g.steps[static_cast<std::size_t>(s)];
            for (std::size_t k = 0; k < st.outputs.size(); ++k) {
                if (!st.active[k]) continue;
                const auto o = static_cast<std::size_t>(st.outputs[k]);
                if (gh[o] != kUnreached) continue;
                gh[o] = sh[static_cast<std::size_t>(s)] + 1;
                queue.push_back(static_cast<int>(o));
            }
        }
    }
    return gh;
}

// One directed cycle as a list of (step, slot) output edges, or empty.
inline std::vector<std::pair<int, int>> find_cycle(const DataflowGraph& g, const std::vector<std::vector<int>>& cons)
{
    const std::size_t ng = g.geoms.size();
    const std::size_t total = ng + g.steps.size();
    std::vector<char> color(total, 0);
    std::vector<std::size_t> parent(total, total);
    std::vector<int> parent_slot(total, -1);

    auto succ = [&](std::size_t v, std::vector<std::pair<std::size_t, int>>& out) {
        out.clear();
        if (v < ng) {
            for (int s : cons[v]) out.emplace_back(ng + static_cast<std::size_t>(s), -1);
        } else {
            const auto& st = g.steps[v - ng];
            for (std::size_t k = 0; k < st.outputs.size(); ++k)
                if (st.active[k]) out.emplace_back(static_cast<std::size_t>(st.outputs[k]), static_cast<int>(k));
        }
    };

    std::vector<std::pair<std::size_t, int>> buf;
    for (std::size_t root = 0; root < total; ++root) {
        if (color[root]) continue;
        if (root >= ng && g.steps[root - ng].removed) continue;
        struct Frame {
            std::size_t v;
            std::vector<std::pair<std::size_t, int>> next;
            std::size_t i;
        };
        std::vector<Frame> st;
        succ(root, buf);
        st.push_back({root, buf, 0});
        color[root] = 1;
        while (!st.empty()) {
            Frame& f = st.back();
            if (f.i == f.next.size()) {
                color[f.v] = 2;
                st.pop_back();
                continue;
            }
            const auto [w, slot] = f.next[f.i++];
            if (color[w] == 1) {
                // back edge f.v -> w closes a cycle
                std::vector<std::pair<int, int>> edges;
                std::size_t v = f.v;
                int sl = slot;
                std::size_t to = w;
                for (;;) {
                    if (v >= ng) edges.emplace_back(static_cast<int>(v - ng), sl);
                    if (v == to) break;
                    sl = parent_slot[v];
                    v = parent[v];
                }
                (void)to;
                return edges;
            }
            if (color[w] == 0) {
                color[w] = 1;
                parent[w] = f.v;
                parent_slot[w] = slot;
                succ(w, buf);
                st.push_back({w, buf, 0});
            }
        }
    }
    return {};
}

}  // namespace detail

// Removes step->geometry edges until the graph is acyclic. In each cycle the
// non-essential edge whose head is farthest from the prompt goes first, then
// the one from the lowest-priority step.
inline void break_cycles(DataflowGraph& g)
{
    for (;;) {
        const auto cons = g.consumers();
        const auto cycle = detail::find_cycle(g, cons);
        if (cycle.empty()) return;
        detail::mark_essential(g);
        const auto hops = detail::hops_from_prompt(g, cons);
        std::optional<std::pair<int, int>> best;
        auto rank = [&](const std::pair<int, int>& e) {
            const auto& st = g.steps[static_cast<std::size_t>(e.first)];
            const int head = st.outputs[static_cast<std::size_t>(e.second)];
            return std::make_tuple(hops[static_cast<std::size_t>(head)], -step_priority(st.kind), e.first);
        };
        for (const auto& e : cycle) {
            if (g.essential.count(e)) continue;
            if (!best || rank(e) > rank(*best)) best = e;
        }
        if (!best) throw UnbreakableCycle("cycle made only of essential edges");
        g.deactivate(best->first, best->second);
    }
}

// Cost of every geometry node over an acyclic graph: zero for the prompt,
// otherwise the cheapest producing step, whose cost is 0.1 plus 1.0 per
// parameter plus the cost of its geometry inputs.
inline std::vector<double> geometry_costs(const DataflowGraph& g)
{
    std::vector<double> cost(g.geoms.size(), -1.0);
    std::vector<char> busy(g.geoms.size(), 0);
    auto visit = [&](auto&& self, std::size_t n) -> double {
        if (cost[n] >= 0.0) return cost[n];
        if (g.geoms[n].is_prompt()) return cost[n] = 0.0;
        if (busy[n]) throw std::logic_error("geometry_costs: graph has a cycle");
        busy[n] = 1;
        double best = kInfiniteCost;
        for (const auto& e : g.geoms[n].in) {
            double c = kStepCost;
            for (const auto& in : g.steps[static_cast<std::size_t>(e.first)].inputs)
                c += in.param ? kParameterCost : self(self, static_cast<std::size_t>(in.id));
            best = std::min(best, c);
        }
        busy[n] = 0;
        return cost[n] = best;
    };
    for (std::size_t i = 0; i < g.geoms.size(); ++i) visit(visit, i);
    return cost;
}

inline double step_total_cost(const DataflowGraph& g, int s, const std::vector<double>& cost)
{
    double c = kStepCost;
    for (const auto& in : g.steps[static_cast<std::size_t>(s)].inputs)
        c += in.param ? kParameterCost : cost[static_cast<std::size_t>(in.id)];
    return c;
}

// Keeps the cheapest provenance of each geometry node and drops every step
// not needed for the required geometry.
inline void prune_graph(DataflowGraph& g)
{
    const auto cost = geometry_costs(g);
    for (std::size_t i = 0; i < g.geoms.size(); ++i)
        if (g.geoms[i].required && !(cost[i] < kInfiniteCost))
            throw IncompleteConstruction("required geometry " + std::to_string(i) + " cannot be constructed");

    for (std::size_t i = 0; i < g.geoms.size(); ++i) {
        auto edges = g.geoms[i].in;
        if (edges.size() < 2) continue;
        auto better = [&](const std::pair<int, int>& a, const std::pair<int, int>& b) {
            const double ca = step_total_cost(g, a.first, cost), cb = step_total_cost(g, b.first, cost);
            if (ca != cb) return ca < cb;
            const int pa = step_priority(g.steps[static_cast<std::size_t>(a.first)].kind);
            const int pb = step_priority(g.steps[static_cast<std::size_t>(b.first)].kind);
            if (pa != pb) return pa > pb;
            return a.first < b.first;
        };
        const auto keep = *std::min_element(edges.begin(), edges.end(), better);
        for (const auto& e : edges)
            if (e != keep) g.deactivate(e.first, e.second);
    }

    std::vector<bool> needed_step(g.steps.size(), false), seen(g.geoms.size(), false);
    std::vector<int> stack;
    for (std::size_t i = 0; i < g.geoms.size(); ++i)
        if (g.geoms[i].required) stack.push_back(static_cast<int>(i));
    while (!stack.empty()) {
        const auto n = static_cast<std::size_t>(stack.back());
        stack.pop_back();
        if (seen[n]) continue;
        seen[n] = true;
        if (g.geoms[n].is_prompt()) continue;
        const int s = g.geoms[n].in.front().first;
        needed_step[static_cast<std::size_t>(s)] = true;
        for (const auto& in : g.steps[static_cast<std::size_t>(s)].inputs)
            if (!in.param) stack.push_back(in.id);
    }
    for (std::size_t s = 0; s < g.steps.size(); ++s)
        if (!needed_step[s] && !g.steps[s].removed) g.remove_step(static_cast<int>(s));

    for (std::size_t i = 0; i < g.geoms.size(); ++i)
        if (seen[i] && !g.geoms[i].is_prompt() && g.geoms[i].in.size() != 1)
            throw std::logic_error("prune_graph: geometry without unique provenance");
}

// A curve of the profile in terms of graph nodes.
struct CurveNodes {
    CurveKind kind = CurveKind::Line;
    std::vector<int> nodes;
};

namespace detail {

// Lexicographically lowest point where the line meets the unit square.
inline Point2 line_box_point(const DirectedLine& l)
{
    const Point2 f = l.foot();
    const Point2 t = l.direction();
    double lo = -1e9, hi = 1e9;
    const double b[2][2] = {{-0.5, 0.5}, {-0.5, 0.5}};
    const double o[2] = {f.x, f.y}, dv[2] = {t.x, t.y};
    for (int k = 0; k < 2; ++k) {
        if (std::abs(dv[k]) < 1e-15) {
            if (o[k] < b[k][0] || o[k] > b[k][1]) return f;
            continue;
        }
        double a0 = (b[k][0] - o[k]) / dv[k], a1 = (b[k][1] - o[k]) / dv[k];
        if (a0 > a1) std::swap(a0, a1);
        lo = std::max(lo, a0);
        hi = std::min(hi, a1);
    }
    if (lo > hi) return f;
    const Point2 p = f + lo * t, q = f + hi * t;
    return (p.x < q.x || (p.x == q.x && p.y < q.y)) ? p : q;
}

inline Point2 geometry_sort_point(const Geometry& g)
{
    if (const auto* p = std::get_if<Point2>(&g)) return *p;
    if (const auto* l = std::get_if<DirectedLine>(&g)) return line_box_point(*l);
    const auto& c = std::get<OrientedCircle>(g);
    return c.center - Point2{0.0, c.radius};
}

}  // namespace detail

// Topological order of the pruned graph. Ready steps are taken by the first
// profile curve that needs them, then by the bottom-left-most output; each
// curve is emitted as soon as it and every earlier curve are constructible.
inline ConstructionSequence order_sequence(const DataflowGraph& g, const GeometricPrompt& prompt,
                                           const std::vector<CurveNodes>& curves, const Profile& profile)
{
    const std::size_t ns = g.steps.size();
    auto producer = [&](int n) -> int {
        const auto& gn = g.geoms[static_cast<std::size_t>(n)];
        if (gn.is_prompt()) return -1;
        if (gn.in.empty()) throw IncompleteConstruction("geometry " + std::to_string(n) + " has no producer");
        return gn.in.front().first;
    };

    // every live step that writes a node, including inactive edges into
    // prompt nodes; a curve waits for all of them so it sees the last register
    std::vector<std::vector<int>> writers(g.geoms.size());
    for (std::size_t s = 0; s < ns; ++s) {
        if (g.steps[s].removed) continue;
        for (int o : g.steps[s].outputs)
            if (o >= 0) writers[static_cast<std::size_t>(o)].push_back(static_cast<int>(s));
    }

    std::vector<std::size_t> first_curve(ns, std::numeric_limits<std::size_t>::max());
    for (std::size_t c = 0; c < curves.size(); ++c) {
        std::vector<int> stack(curves[c].nodes.begin(), curves[c].nodes.end());
        while (!stack.empty()) {
            const int n = stack.back();
            stack.pop_back();
            std::vector<int> ws = writers[static_cast<std::size_t>(n)];
            if (const int p = producer(n); p >= 0) ws.push_back(p);
            for (int s : ws) {
                if (first_curve[static_cast<std::size_t>(s)] <= c) continue;
                first_curve[static_cast<std::size_t>(s)] = c;
                for (const auto& in : g.steps[static_cast<std::size_t>(s)].inputs)
                    if (!in.param) stack.push_back(in.id);
            }
        }
    }

    std::vector<int> indeg(ns, 0);
    std::vector<std::vector<int>> dependents(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        if (g.steps[s].removed) continue;
        std::set<int> deps;
        for (const auto& in : g.steps[s].inputs)
            if (!in.param)
                if (int p = producer(in.id); p >= 0) deps.insert(p);
        indeg[s] = static_cast<int>(deps.size());
        for (int p : deps) dependents[static_cast<std::size_t>(p)].push_back(static_cast<int>(s));
    }

    using Key = std::tuple<std::size_t, double, double, std::size_t>;
    auto key_of = [&](std::size_t s) {
        Point2 q{};
        for (int o : g.steps[s].outputs)
            if (o >= 0) {
                q = detail::geometry_sort_point(g.value(o));
                break;
            }
        return Key{first_curve[s], q.x, q.y, s};
    };
    std::set<Key> ready;
    for (std::size_t s = 0; s < ns; ++s)
        if (!g.steps[s].removed && indeg[s] == 0) ready.insert(key_of(s));

    ConstructionSequence seq;
    seq.prompt = prompt;
    seq.profile = profile;
    std::vector<int> node_reg(g.geoms.size(), -1);
    for (std::size_t i = 0; i < g.geoms.size(); ++i)
        if (g.geoms[i].is_prompt()) node_reg[i] = g.geoms[i].prompt_register;
    std::vector<bool> emitted(ns, false);
    std::vector<int> param_index(g.params.size(), -1);
    int next_reg = static_cast<int>(prompt_register_count(prompt));
    std::size_t next_curve = 0;

    auto available = [&](int n) {
        const int p = producer(n);
        if (p >= 0 && !emitted[static_cast<std::size_t>(p)]) return false;
        const auto& ws = writers[static_cast<std::size_t>(n)];
        return std::all_of(ws.begin(), ws.end(), [&](int s) { return emitted[static_cast<std::size_t>(s)]; });
    };
    auto flush_curves = [&]() {
        while (next_curve < curves.size()) {
            const auto& c = curves[next_curve];
            if (!std::all_of(c.nodes.begin(), c.nodes.end(), available)) return;
            CurveEmit ce{c.kind, {}};
            for (int n : c.nodes) ce.refs.push_back(node_reg[static_cast<std::size_t>(n)]);
            seq.program.emplace_back(std::move(ce));
            ++next_curve;
        }
    };

    flush_curves();
    while (!ready.empty()) {
        const std::size_t s = std::get<3>(*ready.begin());
        ready.erase(ready.begin());
        const auto& sn = g.steps[s];
        Step st{sn.kind, {}, {}, sn.ccw};
        for (const auto& in : sn.inputs) {
            if (in.param) {
                auto& idx = param_index[static_cast<std::size_t>(in.id)];
                if (idx < 0) {
                    idx = static_cast<int>(seq.parameters.size());
                    const auto& pn = g.params[static_cast<std::size_t>(in.id)];
                    seq.parameters.push_back({idx, pn.kind, pn.value});
                }
                st.inputs.push_back(Operand::param(idx));
            } else {
                st.inputs.push_back(Operand::reg(node_reg[static_cast<std::size_t>(in.id)]));
            }
        }
        for (int o : sn.outputs) {
            if (o >= 0) node_reg[static_cast<std::size_t>(o)] = next_reg;
            st.outputs.push_back(next_reg++);
        }
        seq.program.emplace_back(std::move(st));
        emitted[s] = true;
        for (int d : dependents[s])
            if (--indeg[static_cast<std::size_t>(d)] == 0) ready.insert(key_of(static_cast<std::size_t>(d)));
        flush_curves();
    }
    if (next_curve != curves.size()) throw IncompleteConstruction("not every curve could be emitted");
    return seq;
}

}  // namespace pforge
