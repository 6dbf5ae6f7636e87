#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../geometry.hpp"
#include "../metrics.hpp"
#include "../profile.hpp"
#include "../sequence.hpp"
#include "../tokens.hpp"
#include "../vm.hpp"
#include "graph.hpp"
#include "normalize.hpp"
#include "plans.hpp"
#include "prompt.hpp"
#include "relations.hpp"

namespace pforge {

// Everything assembled before simplification: the over-complete graph and
// the profile curves expressed as graph nodes.
struct GraphBuild {
    DataflowGraph graph;
    std::vector<CurveNodes> curves;
    RelationSet relations;
    SourceLines sources;
};

namespace detail {

class GraphBuilder {
public:
    GraphBuilder(const Profile& p, const GeometricPrompt& prompt) : p_(p), prompt_(prompt) {}

    GraphBuild build()
    {
        out_.relations = analyze_relations(p_, prompt_.symmetry_lines);
        seed_prompt();
        add_profile();
        add_construction_lines();
        add_sources();
        add_parallel_plans();
        add_concentric_plans();
        emit_candidate_steps();
        return std::move(out_);
    }

private:
    struct ArcInfo {
        std::size_t loop, curve;
        bool fillet = false;
        std::optional<FilletRelation> rel;
        int circle = -1;
    };

    const Profile& p_;
    const GeometricPrompt& prompt_;
    GraphBuild out_;
    DataflowGraph& g_ = out_.graph;

    std::vector<int> sym_nodes_;
    std::vector<int> prompt_lines_;
    std::vector<int> prompt_points_;
    std::vector<int> prompt_circles_;
    std::vector<int> source_nodes_;
    std::vector<int> lines_;    // carriers and construction lines, in creation order
    std::vector<int> points_;   // required points and centres
    std::vector<int> circles_;  // arc circles and circle loops
    std::vector<ArcInfo> arcs_;
    std::vector<std::vector<int>> carrier_;  // per loop, per curve: carrier node or -1
    std::vector<int> fillet_contacts_;

    static void push_unique(std::vector<int>& v, int n)
    {
        if (std::find(v.begin(), v.end(), n) == v.end()) v.push_back(n);
    }

    const DirectedLine& line(int n) const { return std::get<DirectedLine>(g_.value(n)); }
    const Point2& point(int n) const { return std::get<Point2>(g_.value(n)); }

    void seed_prompt()
    {
        const auto regs = prompt_registers(prompt_);
        for (std::size_t i = 0; i < regs.size(); ++i) {
            const int n = g_.add_prompt_register(regs[i].value, static_cast<int>(i));
            switch (geom_type(regs[i].value)) {
            case GeomType::Point: push_unique(prompt_points_, n); break;
            case GeomType::Line: push_unique(prompt_lines_, n); break;
            case GeomType::Circle: push_unique(prompt_circles_, n); break;
            }
            if (regs[i].role == PromptRole::SymmetryLine) push_unique(sym_nodes_, n);
        }
    }

    int require(const Geometry& v)
    {
        const int n = g_.node(v);
        g_.geoms[static_cast<std::size_t>(n)].required = true;
        return n;
    }

    void add_profile()
    {
        carrier_.resize(p_.loops.size());
        for (std::size_t li = 0; li < p_.loops.size(); ++li) {
            const Loop& loop = p_.loops[li];
            if (loop.is_circle()) {
                const int c = require(*loop.circle);
                out_.curves.push_back({CurveKind::Circle, {c}});
                push_unique(circles_, c);
                push_unique(points_, g_.node(loop.circle->center));
                continue;
            }
            carrier_[li].assign(loop.curves.size(), -1);
            for (std::size_t i = 0; i < loop.curves.size(); ++i) {
                const Curve& cv = loop.curves[i];
                if (const auto* l = std::get_if<LineSegment>(&cv)) {
                    const int s = require(l->start), e = require(l->end);
                    out_.curves.push_back({CurveKind::Line, {s, e}});
                    push_unique(points_, s);
                    push_unique(points_, e);
                    const int c = g_.node(l->carrier());
                    carrier_[li][i] = c;
                    push_unique(lines_, c);
                    continue;
                }
                const auto& a = std::get<ArcSegment>(cv);
                const int s = require(a.start), m = require(a.mid), e = require(a.end);
                out_.curves.push_back({CurveKind::Arc, {s, m, e}});
                push_unique(points_, s);
                push_unique(points_, m);
                push_unique(points_, e);
                ArcInfo info{li, i, false, std::nullopt, -1};
                for (const auto& f : out_.relations.fillets)
                    if (f.loop == li && f.curve == i) info.rel = f;
                info.fillet = info.rel.has_value();
                if (info.fillet) {
                    push_unique(fillet_contacts_, s);
                    push_unique(fillet_contacts_, e);
                    push_unique(fillet_contacts_, m);
                } else {
                    const OrientedCircle oc = a.circle();
                    info.circle = g_.node(oc);
                    push_unique(circles_, info.circle);
                    push_unique(points_, g_.node(oc.center));
                }
                arcs_.push_back(info);
            }
        }
    }

    bool on_line(int ln, Point2 q) const { return std::abs(line(ln).signed_distance(q)) <= kAttachTol; }

    std::vector<int> primary_lines() const
    {
        std::vector<int> v = prompt_lines_;
        for (int l : lines_) push_unique(v, l);
        return v;
    }

    // Axis-aligned lines through arc and circle centres and through vertices
    // that no two profile lines pin down.
    void add_construction_lines()
    {
        auto add_hv = [&](Point2 q) {
            push_unique(lines_, g_.node(DirectedLine{0.0, q.y}));
            push_unique(lines_, g_.node(DirectedLine{kPi / 2, -q.x}));
        };
        for (int c : circles_) {
            const Point2 q = std::get<OrientedCircle>(g_.value(c)).center;
            const int n = g_.find(q);
            if (n >= 0 && g_.geoms[static_cast<std::size_t>(n)].is_prompt()) continue;
            add_hv(q);
        }
        const auto lines = primary_lines();
        for (std::size_t li = 0; li < p_.loops.size(); ++li) {
            const Loop& loop = p_.loops[li];
            if (loop.is_circle()) continue;
            const std::size_t n = loop.curves.size();
            for (std::size_t i = 0; i < n; ++i) {
                const Point2 v = curve_end(loop.curves[i]);
                const int vn = g_.find(v);
                if (vn >= 0 && (g_.geoms[static_cast<std::size_t>(vn)].is_prompt() ||
                                std::find(fillet_contacts_.begin(), fillet_contacts_.end(), vn) != fillet_contacts_.end()))
                    continue;
                const bool a_line = is_line(loop.curves[i]);
                const bool b_line = is_line(loop.curves[(i + 1) % n]);
                if (a_line != b_line) continue;  // line meets arc: LineXCircle
                std::vector<int> through;
                for (int l : lines)
                    if (on_line(l, v)) through.push_back(l);
                bool pinned = false;
                for (std::size_t x = 0; x < through.size() && !pinned; ++x)
                    for (std::size_t y = x + 1; y < through.size(); ++y)
                        if (undirected_gap(line(through[x]).phi, line(through[y]).phi) > kAngleTol) pinned = true;
                if (!pinned) add_hv(v);
            }
        }
    }

    bool needs_construction(int n) const { return !g_.geoms[static_cast<std::size_t>(n)].is_prompt(); }

    void add_sources()
    {
        std::vector<double> dirs;
        for (int l : lines_)
            if (needs_construction(l)) dirs.push_back(line(l).phi);
        out_.sources = identify_source_lines(prompt_, dirs);
        for (int l : prompt_lines_) push_unique(source_nodes_, l);
        const int datum = g_.find(prompt_.datum);
        for (const auto& r : out_.sources.rotations) {
            const int axis = g_.find(r.from_x_axis ? prompt_.datum_x_axis() : prompt_.datum_y_axis());
            if (axis < 0 || datum < 0) continue;
            const int p = g_.param(ParamKind::Angle, r.angle);
            auto id = g_.add_step(StepKind::LineAxisRotatedLine,
                                  {InputRef::geom(axis), InputRef::geom(datum), InputRef::parameter(p)});
            if (id) push_unique(source_nodes_, g_.steps[static_cast<std::size_t>(*id)].outputs[0]);
        }
    }

    std::vector<int> parallel_sources(double phi) const
    {
        std::vector<int> s;
        for (int n : source_nodes_)
            if (n >= 0 && undirected_gap(line(n).phi, phi) <= kAngleTol) s.push_back(n);
        return s;
    }

    void add_parallel_plans()
    {
        std::vector<std::vector<int>> groups;
        for (int l : lines_) {
            if (!needs_construction(l)) continue;
            auto it = std::find_if(groups.begin(), groups.end(), [&](const std::vector<int>& grp) {
                return undirected_gap(line(grp.front()).phi, line(l).phi) <= kAngleTol;
            });
            if (it == groups.end())
                groups.push_back({l});
            else
                it->push_back(l);
        }
        for (const auto& grp : groups) {
            const auto src = parallel_sources(line(grp.front()).phi);
            std::vector<int> sym;
            for (int s : src)
                if (std::find(sym_nodes_.begin(), sym_nodes_.end(), s) != sym_nodes_.end()) sym.push_back(s);
            plan_parallel_offsets(g_, grp, src, sym, out_.relations.distances);
        }
    }

    void add_concentric_plans()
    {
        std::vector<std::vector<int>> groups;
        for (int c : circles_) {
            const Point2 q = std::get<OrientedCircle>(g_.value(c)).center;
            auto it = std::find_if(groups.begin(), groups.end(), [&](const std::vector<int>& grp) {
                return distance(std::get<OrientedCircle>(g_.value(grp.front())).center, q) <= kAttachTol;
            });
            if (it == groups.end())
                groups.push_back({c});
            else
                it->push_back(c);
        }
        for (const auto& grp : groups) {
            const int center = g_.node(std::get<OrientedCircle>(g_.value(grp.front())).center);
            plan_concentric_offsets(g_, center, grp, out_.relations.distances);
        }
    }

    // Node for the reverse of line n.
    int reversed_line(int n) { return g_.node(line_reverse(line(n))); }

    // Node for the line at n's position with the given direction.
    int oriented_like(int n, double phi) { return angle_between(line(n).phi, phi) <= kAngleTol ? n : reversed_line(n); }

    void emit_candidate_steps()
    {
        const auto lines = primary_lines();

        // vertices and centres on two non-parallel lines
        for (int pt : points_) {
            if (!needs_construction(pt)) continue;
            const Point2 q = point(pt);
            std::vector<int> through;
            for (int l : lines)
                if (on_line(l, q)) through.push_back(l);
            for (std::size_t a = 0; a < through.size(); ++a)
                for (std::size_t b = a + 1; b < through.size(); ++b)
                    if (undirected_gap(line(through[a]).phi, line(through[b]).phi) > kAngleTol)
                        g_.add_step(StepKind::LineXLine, {InputRef::geom(through[a]), InputRef::geom(through[b])}, true,
                                    {pt});
        }

        for (const auto& arc : arcs_) {
            const Loop& loop = p_.loops[arc.loop];
            const auto& a = std::get<ArcSegment>(loop.curves[arc.curve]);
            const int s = g_.find(a.start), m = g_.find(a.mid), e = g_.find(a.end);
            if (arc.fillet) {
                const auto& f = *arc.rel;
                const int l1 = carrier_[arc.loop][f.prev], l2 = carrier_[arc.loop][f.next];
                const int r = g_.param(ParamKind::Length, f.radius);
                if (f.convex)
                    g_.add_step(StepKind::LineLineFillet,
                                {InputRef::geom(l1), InputRef::geom(l2), InputRef::parameter(r)}, true, {s, m, e});
                else
                    g_.add_step(StepKind::LineLineFillet,
                                {InputRef::geom(reversed_line(l2)), InputRef::geom(reversed_line(l1)),
                                 InputRef::parameter(r)},
                                true, {e, m, s});
                continue;
            }
            g_.add_step(StepKind::CirclePointPointArc, {InputRef::geom(arc.circle), InputRef::geom(s), InputRef::geom(e)},
                        true, {m});
            // line/arc vertices at both ends
            const std::size_t n = loop.curves.size();
            const std::size_t prev = (arc.curve + n - 1) % n, next = (arc.curve + 1) % n;
            const std::pair<std::size_t, int> ends[2] = {{prev, s}, {next, e}};
            for (const auto& [ci, vtx] : ends) {
                const int l = carrier_[arc.loop][ci];
                if (l < 0 || !needs_construction(vtx)) continue;
                const auto& oc = std::get<OrientedCircle>(g_.value(arc.circle));
                std::vector<Point2> pts;
                try {
                    pts = line_x_circle(line(l), oc);
                } catch (const NoSolution&) {
                    continue;
                }
                std::vector<std::optional<int>> tg(2);
                if (pts.size() == 1)
                    tg[1] = vtx;
                else
                    tg[distance(pts[0], point(vtx)) <= distance(pts[1], point(vtx)) ? 0 : 1] = vtx;
                g_.add_step(StepKind::LineXCircle, {InputRef::geom(l), InputRef::geom(arc.circle)}, true, tg);
            }
        }

        // mirrored points and lines
        for (int s : sym_nodes_) {
            const DirectedLine& sym = line(s);
            for (int a : points_)
                for (int b : points_) {
                    if (a == b || !needs_construction(b)) continue;
                    if (distance(point_sym_point(point(a), sym), point(b)) > kAttachTol) continue;
                    g_.add_step(StepKind::PointLineSymPoint, {InputRef::geom(a), InputRef::geom(s)}, true, {b});
                }
            for (int a : lines)
                for (int b : lines) {
                    if (a == b || !needs_construction(b)) continue;
                    if (!geometry_close(line_sym_line(line(a), sym), line(b), kAttachTol)) continue;
                    g_.add_step(StepKind::LineSymLineLine, {InputRef::geom(a), InputRef::geom(s)}, true, {b});
                }
        }

        // parallels through prompt points and tangent to circles
        std::vector<int> round = prompt_circles_;
        for (int c : circles_) push_unique(round, c);
        for (int l : lines_) {
            if (!needs_construction(l)) continue;
            const DirectedLine& ln = line(l);
            const auto src = parallel_sources(ln.phi);
            if (src.empty()) continue;
            const int s0 = src.front();
            for (int pt : prompt_points_) {
                if (!on_line(l, point(pt))) continue;
                const int want = oriented_like(l, line(s0).phi);
                g_.add_step(StepKind::LineDatumParallelLine, {InputRef::geom(s0), InputRef::geom(pt)}, true, {want});
            }
            for (int c : round) {
                const auto& oc = std::get<OrientedCircle>(g_.value(c));
                const double sd = ln.signed_distance(oc.center);
                if (std::abs(std::abs(sd) - oc.radius) > kAttachTol) continue;
                const int want = sd > 0 ? l : reversed_line(l);
                const int input = oriented_like(s0, line(want).phi);
                g_.add_step(StepKind::LineCircleParallelLine, {InputRef::geom(input), InputRef::geom(c)}, true, {want});
            }
        }
    }
};

}  // namespace detail

inline GraphBuild build_dataflow_graph(const Profile& p, const GeometricPrompt& prompt)
{
    return detail::GraphBuilder(p, prompt).build();
}

struct ExtractionConfig {
    PromptConfig prompt;
    // Replays, compares and tokenizes each result before accepting it.
    bool verify = true;
};

struct Extraction {
    Profile profile;  // normalized and preprocessed source
    Similarity to_raw;
    ConstructionSequence sequence;
};

// Profile -> (prompt, construction sequence). Throws DegenerateProfile,
// UnbreakableCycle or IncompleteConstruction for profiles it cannot handle.
inline Extraction extract(const Profile& raw, std::uint64_t seed, const ExtractionConfig& cfg = {})
{
    const Normalized n = normalize_profile(raw);
    Extraction ex;
    ex.profile = preprocess(n.profile);
    ex.to_raw = n.to_raw;
    const GeometricPrompt prompt = extract_prompt(ex.profile, seed, cfg.prompt);

    GraphBuild b = build_dataflow_graph(ex.profile, prompt);
    complete_graph(b.graph);
    break_cycles(b.graph);
    prune_graph(b.graph);
    ex.sequence = order_sequence(b.graph, prompt, b.curves, ex.profile);

    if (cfg.verify) {
        const auto problems = validate_topology(ex.sequence);
        if (!problems.empty()) throw IncompleteConstruction("invalid program: " + problems.front());
        if (static_cast<int>(ex.sequence.parameters.size()) > kMaxParameters)
            throw IncompleteConstruction("too many parameters");
        const ReplayResult r = replay(ex.sequence);
        if (!r.ok()) throw IncompleteConstruction("replay failed");
        if (hausdorff_distance(r.profile, ex.profile) > kLengthTol)
            throw IncompleteConstruction("replay drifts from the source profile");
        try {
            (void)tokenize(ex.sequence);
        } catch (const std::exception& e) {
            throw IncompleteConstruction(std::string("not tokenizable: ") + e.what());
        }
    }
    return ex;
}

}  // namespace pforge
