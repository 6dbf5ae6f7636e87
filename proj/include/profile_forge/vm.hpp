#pragma once

// Interpreter for construction programs.
//
// replay() runs every instruction in order. A step whose kernel call has no
// solution is recorded as failed; steps that read one of its outputs are
// skipped and curves that need them are dropped, but execution continues.
//
// With overrides, a second safeguard applies: the program is first replayed
// at its defaults, and any emitted curve whose direction reverses (lines) or
// whose orientation flips (arcs) relative to that baseline is treated as a
// failure of the later of the steps producing its end points. This is how a
// fillet that outgrows its corner shows up.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "profile.hpp"
#include "sequence.hpp"

namespace pforge {

using Overrides = std::map<int, double>;

enum class StepStatus { Ok, Failed, Skipped };

enum class FailureCause { NoSolution, CurveInverted, DegenerateCurve };

inline std::string_view cause_name(FailureCause c)
{
    switch (c) {
    case FailureCause::NoSolution: return "NoSolution";
    case FailureCause::CurveInverted: return "CurveInverted";
    case FailureCause::DegenerateCurve: return "DegenerateCurve";
    }
    return "?";
}

struct StepFailure {
    std::size_t instruction = 0;
    FailureCause cause = FailureCause::NoSolution;
    std::string message;
};

// Either a geometry register value or a parameter value.
using Value = std::variant<Point2, DirectedLine, OrientedCircle, double>;

struct TraceRecord {
    std::size_t instruction = 0;
    bool is_curve = false;
    std::optional<StepKind> kind;
    StepStatus status = StepStatus::Ok;
    std::vector<std::optional<Value>> inputs;
    std::vector<std::optional<Geometry>> outputs;
    std::optional<Curve> curve;
    std::optional<OrientedCircle> circle;
    std::string message;
};

using ReplayTrace = std::vector<TraceRecord>;

struct ReplayResult {
    Profile profile;
    ReplayTrace trace;
    std::vector<StepFailure> failures;
    // Loops whose curve chain did not close (only possible after failures).
    std::vector<std::size_t> open_loops;

    bool ok() const { return failures.empty(); }
};

namespace detail {

inline ParameterTable resolve_parameters(const ParameterTable& table, const Overrides& overrides)
{
    ParameterTable out = table;
    for (const auto& [idx, v] : overrides) {
        bool found = false;
        for (auto& p : out)
            if (p.index == idx) {
                p.value = v;
                found = true;
            }
        if (!found) throw InvalidReference("unknown parameter " + std::to_string(idx));
    }
    return out;
}

inline std::vector<Geometry> execute_step(const Step& st, const std::vector<Value>& in)
{
    auto L = [&](std::size_t i) { return std::get<DirectedLine>(in[i]); };
    auto C = [&](std::size_t i) { return std::get<OrientedCircle>(in[i]); };
    auto P = [&](std::size_t i) { return std::get<Point2>(in[i]); };
    auto S = [&](std::size_t i) { return std::get<double>(in[i]); };
    switch (st.kind) {
    case StepKind::LineXLine: return {line_x_line(L(0), L(1))};
    case StepKind::LineXCircle: {
        auto pts = line_x_circle(L(0), C(1));
        if (pts.size() == 1) return {pts[0], pts[0]};
        return {pts[0], pts[1]};
    }
    case StepKind::LineOffsetLine: return {line_offset_line(L(0), S(1))};
    case StepKind::CircleOffsetCircle: return {circle_offset_circle(C(0), S(1))};
    case StepKind::LineReverseLine: return {line_reverse(L(0))};
    case StepKind::CircleReverseCircle: return {circle_reverse(C(0))};
    case StepKind::PointLineSymPoint: return {point_sym_point(P(0), L(1))};
    case StepKind::LineSymLineLine: return {line_sym_line(L(0), L(1))};
    case StepKind::LineAxisRotatedLine: return {line_axis_rotated_line(L(0), P(1), S(2))};
    case StepKind::LineDatumParallelLine: return {line_datum_parallel_line(L(0), P(1))};
    case StepKind::LineCircleParallelLine: return {line_circle_parallel_line(L(0), C(1))};
    case StepKind::SymLineOffsetLineLine: {
        auto r = sym_line_offset_line_line(L(0), S(1));
        return {r[0], r[1]};
    }
    case StepKind::PointRadiusCircle: return {point_radius_circle(P(0), S(1), st.ccw)};
    case StepKind::CirclePointPointArc: return {circle_point_point_arc(C(0), P(1), P(2)).mid};
    case StepKind::LineLineFillet: {
        auto a = line_line_fillet(L(0), L(1), S(2));
        return {a.start, a.mid, a.end};
    }
    }
    return {};
}

inline Value to_value(const Geometry& g)
{
    return std::visit([](const auto& x) -> Value { return x; }, g);
}

struct RawRun {
    std::vector<std::optional<Geometry>> regs;
    std::vector<int> producer;  // instruction index per register, -1 for prompt
    ReplayTrace trace;
    std::vector<StepFailure> failures;
};

inline RawRun run(const ConstructionSequence& seq, const ParameterTable& params)
{
    RawRun r;
    for (const auto& pr : prompt_registers(seq.prompt)) {
        r.regs.push_back(pr.value);
        r.producer.push_back(-1);
    }
    std::map<int, double> pv;
    for (const auto& p : params) pv[p.index] = p.value;

    auto reg_at = [&](int i) -> const std::optional<Geometry>& {
        if (i < 0 || static_cast<std::size_t>(i) >= r.regs.size())
            throw InvalidReference("register " + std::to_string(i) + " not defined");
        return r.regs[static_cast<std::size_t>(i)];
    };

    for (std::size_t ii = 0; ii < seq.program.size(); ++ii) {
        TraceRecord rec;
        rec.instruction = ii;
        if (const auto* st = std::get_if<Step>(&seq.program[ii])) {
            const auto& sig = signature(st->kind);
            rec.kind = st->kind;
            if (st->inputs.size() != sig.inputs.size() || st->outputs.size() != sig.outputs.size())
                throw InvalidReference("instruction " + std::to_string(ii) + ": arity mismatch");
            std::vector<Value> in;
            bool skip = false;
            for (std::size_t k = 0; k < st->inputs.size(); ++k) {
                const Operand& op = st->inputs[k];
                if (op.is_param()) {
                    if (!is_scalar(sig.inputs[k]))
                        throw InvalidReference("instruction " + std::to_string(ii) + ": parameter in geometry slot");
                    auto it = pv.find(op.index);
                    if (it == pv.end())
                        throw InvalidReference("parameter " + std::to_string(op.index) + " not defined");
                    in.emplace_back(it->second);
                    rec.inputs.emplace_back(it->second);
                    continue;
                }
                if (is_scalar(sig.inputs[k]))
                    throw InvalidReference("instruction " + std::to_string(ii) + ": register in scalar slot");
                const auto& g = reg_at(op.index);
                if (!g) {
                    skip = true;
                    rec.inputs.emplace_back(std::nullopt);
                    continue;
                }
                if (slot_of(geom_type(*g)) != sig.inputs[k])
                    throw InvalidReference("instruction " + std::to_string(ii) + ": operand type mismatch");
                in.push_back(to_value(*g));
                rec.inputs.emplace_back(to_value(*g));
            }
            std::vector<std::optional<Geometry>> outs(st->outputs.size());
            if (skip) {
                rec.status = StepStatus::Skipped;
            } else {
                try {
                    auto res = execute_step(*st, in);
                    for (std::size_t k = 0; k < res.size(); ++k) outs[k] = res[k];
                } catch (const NoSolution& e) {
                    rec.status = StepStatus::Failed;
                    rec.message = e.what();
                    r.failures.push_back({ii, FailureCause::NoSolution, e.what()});
                }
            }
            for (std::size_t k = 0; k < st->outputs.size(); ++k) {
                if (static_cast<std::size_t>(st->outputs[k]) != r.regs.size())
                    throw InvalidReference("instruction " + std::to_string(ii) + ": output register out of sequence");
                r.regs.push_back(outs[k]);
                r.producer.push_back(static_cast<int>(ii));
            }
            rec.outputs = std::move(outs);
        } else {
            const auto& ce = std::get<CurveEmit>(seq.program[ii]);
            rec.is_curve = true;
            const std::size_t want = ce.kind == CurveKind::Line ? 2 : ce.kind == CurveKind::Arc ? 3 : 1;
            if (ce.refs.size() != want)
                throw InvalidReference("instruction " + std::to_string(ii) + ": curve arity mismatch");
            std::vector<Geometry> gs;
            for (int ref : ce.refs) {
                const auto& g = reg_at(ref);
                if (!g) {
                    rec.status = StepStatus::Skipped;
                    rec.inputs.emplace_back(std::nullopt);
                    continue;
                }
                const GeomType need = ce.kind == CurveKind::Circle ? GeomType::Circle : GeomType::Point;
                if (geom_type(*g) != need)
                    throw InvalidReference("instruction " + std::to_string(ii) + ": curve operand type mismatch");
                gs.push_back(*g);
                rec.inputs.emplace_back(to_value(*g));
            }
            if (rec.status == StepStatus::Ok) {
                if (ce.kind == CurveKind::Circle) {
                    rec.circle = std::get<OrientedCircle>(gs[0]);
                } else if (ce.kind == CurveKind::Line) {
                    LineSegment s{std::get<Point2>(gs[0]), std::get<Point2>(gs[1])};
                    if (s.length() <= 1e-12) {
                        rec.status = StepStatus::Failed;
                        rec.message = "zero-length line";
                    } else {
                        rec.curve = s;
                    }
                } else {
                    ArcSegment a{std::get<Point2>(gs[0]), std::get<Point2>(gs[1]), std::get<Point2>(gs[2])};
                    try {
                        (void)a.circle();
                        rec.curve = a;
                    } catch (const NoSolution&) {
                        rec.status = StepStatus::Failed;
                        rec.message = "collinear arc points";
                    }
                }
            }
        }
        r.trace.push_back(std::move(rec));
    }
    return r;
}

// Instruction responsible for a degenerate or inverted curve: the latest
// producer among its end point registers, or the curve itself.
inline std::size_t blame(const RawRun& r, const CurveEmit& ce, std::size_t curve_ii)
{
    int best = -1;
    for (int ref : ce.refs) best = std::max(best, r.producer[static_cast<std::size_t>(ref)]);
    return best < 0 ? curve_ii : static_cast<std::size_t>(best);
}

}  // namespace detail

inline ReplayResult replay(const ConstructionSequence& seq, const Overrides& overrides = {})
{
    const ParameterTable params = detail::resolve_parameters(seq.parameters, overrides);
    detail::RawRun run = detail::run(seq, params);

    std::optional<detail::RawRun> base;
    if (!overrides.empty() && params != seq.parameters) base = detail::run(seq, seq.parameters);

    std::set<std::size_t> blamed;
    for (const auto& f : run.failures) blamed.insert(f.instruction);

    for (std::size_t ii = 0; ii < seq.program.size(); ++ii) {
        const auto* ce = std::get_if<CurveEmit>(&seq.program[ii]);
        if (!ce) continue;
        auto& rec = run.trace[ii];
        if (rec.status == StepStatus::Failed) {
            const std::size_t b = detail::blame(run, *ce, ii);
            rec.status = StepStatus::Skipped;
            if (blamed.insert(b).second)
                run.failures.push_back({b, FailureCause::DegenerateCurve, rec.message});
            if (b != ii) {
                run.trace[b].status = StepStatus::Failed;
                if (run.trace[b].message.empty()) run.trace[b].message = rec.message;
            }
            continue;
        }
        if (!base || !rec.curve) continue;
        const auto& brec = base->trace[ii];
        if (!brec.curve) continue;
        bool inverted = false;
        if (const auto* l = std::get_if<LineSegment>(&*rec.curve)) {
            const auto& bl = std::get<LineSegment>(*brec.curve);
            inverted = dot(l->end - l->start, bl.end - bl.start) <= 0.0;
        } else {
            const auto& a = std::get<ArcSegment>(*rec.curve);
            const auto& ba = std::get<ArcSegment>(*brec.curve);
            inverted = a.circle().ccw != ba.circle().ccw;
        }
        if (!inverted) continue;
        const std::size_t b = detail::blame(run, *ce, ii);
        rec.curve.reset();
        rec.status = StepStatus::Skipped;
        rec.message = "curve inverted";
        if (b != ii) {
            run.trace[b].status = StepStatus::Failed;
            if (run.trace[b].message.empty()) run.trace[b].message = "output inverts a profile curve";
        }
        if (blamed.insert(b).second) run.failures.push_back({b, FailureCause::CurveInverted, "profile curve inverted"});
    }
    std::sort(run.failures.begin(), run.failures.end(),
              [](const StepFailure& a, const StepFailure& b) { return a.instruction < b.instruction; });

    // Loop assembly.
    ReplayResult out;
    struct Open {
        std::vector<Curve> curves;
        int first_ref = -1;
        int last_ref = -1;
    };
    std::optional<Open> cur;
    auto closes = [](const Open& o) {
        if (o.curves.empty()) return false;
        if (o.first_ref >= 0 && o.first_ref == o.last_ref) return true;
        return distance(curve_start(o.curves.front()), curve_end(o.curves.back())) <= 1e-9;
    };
    auto flush = [&]() {
        if (!cur) return;
        if (!closes(*cur) || cur->curves.size() < 2) out.open_loops.push_back(out.profile.loops.size());
        out.profile.loops.push_back(Loop::of_curves(std::move(cur->curves)));
        cur.reset();
    };
    for (std::size_t ii = 0; ii < seq.program.size(); ++ii) {
        const auto* ce = std::get_if<CurveEmit>(&seq.program[ii]);
        if (!ce) continue;
        const auto& rec = run.trace[ii];
        if (ce->kind == CurveKind::Circle) {
            if (!rec.circle) continue;
            flush();
            out.profile.loops.push_back(Loop::of_circle(*rec.circle));
            continue;
        }
        if (!rec.curve) continue;
        const int sref = ce->refs.front();
        const int eref = ce->refs.back();
        bool chains = false;
        if (cur && !closes(*cur))
            chains = sref == cur->last_ref ||
                     distance(curve_start(*rec.curve), curve_end(cur->curves.back())) <= 1e-9;
        if (!chains) {
            flush();
            cur = Open{{}, sref, -1};
        }
        cur->curves.push_back(*rec.curve);
        cur->last_ref = eref;
    }
    flush();
    out.trace = std::move(run.trace);
    out.failures = std::move(run.failures);
    return out;
}

// Parameters in order of first use by a step.
inline ParameterTable list_parameters(const ConstructionSequence& seq)
{
    ParameterTable out;
    std::set<int> seen;
    for (const auto& ins : seq.program) {
        const auto* st = std::get_if<Step>(&ins);
        if (!st) continue;
        for (const auto& op : st->inputs) {
            if (!op.is_param() || !seen.insert(op.index).second) continue;
            for (const auto& p : seq.parameters)
                if (p.index == op.index) out.push_back(p);
        }
    }
    return out;
}

// Structural checks that do not require evaluating geometry beyond types.
inline std::vector<std::string> validate_topology(const ConstructionSequence& seq)
{
    std::vector<std::string> v;
    std::vector<GeomType> types;
    for (const auto& pr : prompt_registers(seq.prompt)) types.push_back(geom_type(pr.value));

    std::map<int, ParamKind> pkinds;
    for (const auto& p : seq.parameters) {
        if (pkinds.count(p.index)) v.push_back("parameter " + std::to_string(p.index) + " defined twice");
        pkinds[p.index] = p.kind;
    }
    if (seq.parameters.size() > static_cast<std::size_t>(kMaxParameters)) v.push_back("more than 32 parameters");

    int next_param = 0;
    std::set<int> used;
    for (std::size_t ii = 0; ii < seq.program.size(); ++ii) {
        const std::string at = "instruction " + std::to_string(ii) + ": ";
        if (const auto* st = std::get_if<Step>(&seq.program[ii])) {
            const auto& sig = signature(st->kind);
            if (st->inputs.size() != sig.inputs.size()) {
                v.push_back(at + "expected " + std::to_string(sig.inputs.size()) + " inputs");
                continue;
            }
            if (st->outputs.size() != sig.outputs.size()) {
                v.push_back(at + "expected " + std::to_string(sig.outputs.size()) + " outputs");
                continue;
            }
            for (std::size_t k = 0; k < st->inputs.size(); ++k) {
                const Operand& op = st->inputs[k];
                const Slot want = sig.inputs[k];
                if (op.is_param()) {
                    if (!is_scalar(want)) {
                        v.push_back(at + "parameter used as geometry");
                        continue;
                    }
                    auto it = pkinds.find(op.index);
                    if (it == pkinds.end()) {
                        v.push_back(at + "undefined parameter " + std::to_string(op.index));
                        continue;
                    }
                    const ParamKind need = want == Slot::Length ? ParamKind::Length : ParamKind::Angle;
                    if (it->second != need) v.push_back(at + "parameter kind mismatch");
                    if (used.insert(op.index).second) {
                        if (op.index != next_param) v.push_back(at + "parameter indices not in first-use order");
                        ++next_param;
                    }
                    continue;
                }
                if (is_scalar(want)) {
                    v.push_back(at + "register used as scalar");
                    continue;
                }
                if (op.index < 0 || static_cast<std::size_t>(op.index) >= types.size()) {
                    v.push_back(at + "reference to undefined register " + std::to_string(op.index));
                    continue;
                }
                if (slot_of(types[static_cast<std::size_t>(op.index)]) != want)
                    v.push_back(at + "operand type mismatch");
            }
            for (std::size_t k = 0; k < st->outputs.size(); ++k) {
                if (static_cast<std::size_t>(st->outputs[k]) != types.size())
                    v.push_back(at + "output register " + std::to_string(st->outputs[k]) + " is not the next free id");
                types.push_back(sig.outputs[k]);
            }
        } else {
            const auto& ce = std::get<CurveEmit>(seq.program[ii]);
            const std::size_t want = ce.kind == CurveKind::Line ? 2 : ce.kind == CurveKind::Arc ? 3 : 1;
            if (ce.refs.size() != want) {
                v.push_back(at + "curve arity mismatch");
                continue;
            }
            const GeomType need = ce.kind == CurveKind::Circle ? GeomType::Circle : GeomType::Point;
            for (int ref : ce.refs) {
                if (ref < 0 || static_cast<std::size_t>(ref) >= types.size())
                    v.push_back(at + "reference to undefined register " + std::to_string(ref));
                else if (types[static_cast<std::size_t>(ref)] != need)
                    v.push_back(at + "curve operand type mismatch");
            }
        }
    }
    for (const auto& p : seq.parameters)
        if (!used.count(p.index)) v.push_back("parameter " + std::to_string(p.index) + " never used");

    // Chains of emitted curves must close through shared registers.
    int first = -1;
    int last = -1;
    bool open = false;
    std::size_t loop_no = 0;
    auto end_chain = [&]() {
        if (open && first != last) v.push_back("loop " + std::to_string(loop_no) + " does not close");
        if (open) ++loop_no;
        open = false;
    };
    for (const auto& ins : seq.program) {
        const auto* ce = std::get_if<CurveEmit>(&ins);
        if (!ce || ce->refs.empty()) continue;
        if (ce->kind == CurveKind::Circle) {
            end_chain();
            ++loop_no;
            continue;
        }
        if (open && first != last && ce->refs.front() == last) {
            last = ce->refs.back();
            continue;
        }
        end_chain();
        open = true;
        first = ce->refs.front();
        last = ce->refs.back();
    }
    end_chain();
    return v;
}

}  // namespace pforge
