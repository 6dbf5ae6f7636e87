#pragma once

// Construction programs: prompt, parameter table, instructions and the
// profile they build. Registers are single-assignment; the prompt seeds the
// first registers and every step output takes the next free id.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "profile.hpp"
#include "quantize.hpp"

namespace pforge {

enum class StepKind {
    LineXLine,
    LineXCircle,
    LineOffsetLine,
    CircleOffsetCircle,
    LineReverseLine,
    CircleReverseCircle,
    PointLineSymPoint,
    LineSymLineLine,
    LineAxisRotatedLine,
    LineDatumParallelLine,
    LineCircleParallelLine,
    SymLineOffsetLineLine,
    PointRadiusCircle,
    CirclePointPointArc,
    LineLineFillet,
};

inline constexpr std::array<StepKind, 15> kAllStepKinds = {
    StepKind::LineXLine,          StepKind::LineXCircle,           StepKind::LineOffsetLine,
    StepKind::CircleOffsetCircle, StepKind::LineReverseLine,       StepKind::CircleReverseCircle,
    StepKind::PointLineSymPoint,  StepKind::LineSymLineLine,       StepKind::LineAxisRotatedLine,
    StepKind::LineDatumParallelLine, StepKind::LineCircleParallelLine, StepKind::SymLineOffsetLineLine,
    StepKind::PointRadiusCircle,  StepKind::CirclePointPointArc,   StepKind::LineLineFillet,
};

inline std::string_view step_name(StepKind k)
{
    switch (k) {
    case StepKind::LineXLine: return "LineXLine";
    case StepKind::LineXCircle: return "LineXCircle";
    case StepKind::LineOffsetLine: return "LineOffsetLine";
    case StepKind::CircleOffsetCircle: return "CircleOffsetCircle";
    case StepKind::LineReverseLine: return "LineReverseLine";
    case StepKind::CircleReverseCircle: return "CircleReverseCircle";
    case StepKind::PointLineSymPoint: return "PointLineSymPoint";
    case StepKind::LineSymLineLine: return "LineSymLineLine";
    case StepKind::LineAxisRotatedLine: return "LineAxisRotatedLine";
    case StepKind::LineDatumParallelLine: return "LineDatumParallelLine";
    case StepKind::LineCircleParallelLine: return "LineCircleParallelLine";
    case StepKind::SymLineOffsetLineLine: return "SymLineOffsetLineLine";
    case StepKind::PointRadiusCircle: return "PointRadiusCircle";
    case StepKind::CirclePointPointArc: return "CirclePointPointArc";
    case StepKind::LineLineFillet: return "LineLineFillet";
    }
    return "?";
}

inline std::optional<StepKind> step_from_name(std::string_view s)
{
    for (StepKind k : kAllStepKinds)
        if (step_name(k) == s) return k;
    return std::nullopt;
}

enum class GeomType { Point, Line, Circle };
enum class ParamKind { Length, Angle };
enum class Slot { Point, Line, Circle, Length, Angle };

inline bool is_scalar(Slot s) { return s == Slot::Length || s == Slot::Angle; }

inline Slot slot_of(GeomType t)
{
    switch (t) {
    case GeomType::Point: return Slot::Point;
    case GeomType::Line: return Slot::Line;
    case GeomType::Circle: return Slot::Circle;
    }
    return Slot::Point;
}

struct StepSignature {
    std::vector<Slot> inputs;
    std::vector<GeomType> outputs;
};

inline const StepSignature& signature(StepKind k)
{
    using S = Slot;
    using G = GeomType;
    static const std::array<StepSignature, 15> table = {{
        {{S::Line, S::Line}, {G::Point}},
        {{S::Line, S::Circle}, {G::Point, G::Point}},
        {{S::Line, S::Length}, {G::Line}},
        {{S::Circle, S::Length}, {G::Circle}},
        {{S::Line}, {G::Line}},
        {{S::Circle}, {G::Circle}},
        {{S::Point, S::Line}, {G::Point}},
        {{S::Line, S::Line}, {G::Line}},
        {{S::Line, S::Point, S::Angle}, {G::Line}},
        {{S::Line, S::Point}, {G::Line}},
        {{S::Line, S::Circle}, {G::Line}},
        {{S::Line, S::Length}, {G::Line, G::Line}},
        {{S::Point, S::Length}, {G::Circle}},
        {{S::Circle, S::Point, S::Point}, {G::Point}},
        {{S::Line, S::Line, S::Length}, {G::Point, G::Point, G::Point}},
    }};
    return table[static_cast<std::size_t>(k)];
}

using Geometry = std::variant<Point2, DirectedLine, OrientedCircle>;

inline GeomType geom_type(const Geometry& g) { return static_cast<GeomType>(g.index()); }

struct Operand {
    enum class Source { Register, Parameter };
    Source source = Source::Register;
    int index = 0;

    static Operand reg(int i) { return {Source::Register, i}; }
    static Operand param(int i) { return {Source::Parameter, i}; }
    bool is_param() const { return source == Source::Parameter; }

    friend bool operator==(const Operand&, const Operand&) = default;
};

struct Step {
    StepKind kind = StepKind::LineXLine;
    std::vector<Operand> inputs;
    std::vector<int> outputs;
    // Orientation of the circle made by PointRadiusCircle; ignored otherwise.
    bool ccw = true;

    friend bool operator==(const Step&, const Step&) = default;
};

enum class CurveKind { Line, Arc, Circle };

// Adds a profile curve built from registers: 2 points, 3 points, or 1 circle.
struct CurveEmit {
    CurveKind kind = CurveKind::Line;
    std::vector<int> refs;

    friend bool operator==(const CurveEmit&, const CurveEmit&) = default;
};

using Instruction = std::variant<Step, CurveEmit>;

struct Parameter {
    int index = 0;
    ParamKind kind = ParamKind::Length;
    double value = 0.0;

    friend bool operator==(const Parameter&, const Parameter&) = default;
};

using ParameterTable = std::vector<Parameter>;

struct BoltHole {
    Point2 center;
    double radius = 0.0;
    double clearance = 0.0;

    friend bool operator==(const BoltHole&, const BoltHole&) = default;
};

struct GeometricPrompt {
    Point2 datum;
    BoundingBox bbox;
    double area = 0.0;
    int complexity = 1;
    int num_loops = 1;
    double smooth_fraction = 0.0;
    Point2 cog;
    std::vector<DirectedLine> symmetry_lines;
    std::vector<LineSegment> bound_lines;
    std::vector<BoltHole> bolt_holes;

    DirectedLine datum_x_axis() const { return {0.0, datum.y}; }
    DirectedLine datum_y_axis() const { return {kPi / 2, -datum.x}; }

    friend bool operator==(const GeometricPrompt&, const GeometricPrompt&) = default;
};

struct ConstructionSequence {
    GeometricPrompt prompt;
    ParameterTable parameters;
    std::vector<Instruction> program;
    Profile profile;

    friend bool operator==(const ConstructionSequence&, const ConstructionSequence&) = default;
};

inline constexpr int kMaxParameters = 32;

// What a prompt register stands for, for display and diagnostics.
enum class PromptRole {
    DatumPoint,
    DatumXAxis,
    DatumYAxis,
    SymmetryLine,
    BoundStart,
    BoundEnd,
    BoundCarrier,
    HoleCenter,
    HoleCircle,
    ClearanceCircle,
};

struct PromptRegister {
    Geometry value;
    PromptRole role;
    int owner = 0;  // index within its prompt list
};

// Registers seeded by a prompt, in canonical order.
inline std::vector<PromptRegister> prompt_registers(const GeometricPrompt& p)
{
    std::vector<PromptRegister> r;
    r.push_back({p.datum, PromptRole::DatumPoint, 0});
    r.push_back({p.datum_x_axis(), PromptRole::DatumXAxis, 0});
    r.push_back({p.datum_y_axis(), PromptRole::DatumYAxis, 0});
    for (std::size_t i = 0; i < p.symmetry_lines.size(); ++i)
        r.push_back({p.symmetry_lines[i], PromptRole::SymmetryLine, static_cast<int>(i)});
    for (std::size_t i = 0; i < p.bound_lines.size(); ++i) {
        const auto& b = p.bound_lines[i];
        const int o = static_cast<int>(i);
        r.push_back({b.start, PromptRole::BoundStart, o});
        r.push_back({b.end, PromptRole::BoundEnd, o});
        r.push_back({b.carrier(), PromptRole::BoundCarrier, o});
    }
    for (std::size_t i = 0; i < p.bolt_holes.size(); ++i) {
        const auto& h = p.bolt_holes[i];
        const int o = static_cast<int>(i);
        r.push_back({h.center, PromptRole::HoleCenter, o});
        r.push_back({OrientedCircle{h.center, h.radius, false}, PromptRole::HoleCircle, o});
        r.push_back({OrientedCircle{h.center, h.clearance, true}, PromptRole::ClearanceCircle, o});
    }
    return r;
}

inline std::size_t prompt_register_count(const GeometricPrompt& p)
{
    return 3 + p.symmetry_lines.size() + 3 * p.bound_lines.size() + 3 * p.bolt_holes.size();
}

inline GeometricPrompt quantized_copy(const GeometricPrompt& p)
{
    GeometricPrompt q = p;
    q.datum = snap_point(p.datum);
    q.bbox = {snap_point(p.bbox.min), snap_point(p.bbox.max)};
    q.area = snap_unit(p.area);
    q.complexity = snap_count(p.complexity);
    q.num_loops = snap_count(p.num_loops);
    q.smooth_fraction = snap_unit(p.smooth_fraction);
    q.cog = snap_point(p.cog);
    for (auto& l : q.symmetry_lines) l = snap_infline(l);
    for (auto& b : q.bound_lines) b = {snap_point(b.start), snap_point(b.end)};
    for (auto& h : q.bolt_holes) h = {snap_point(h.center), snap_length(h.radius), snap_length(h.clearance)};
    return q;
}

// Profile as carried by tokens: points snapped, circle loops oriented by
// position (outer ccw, inner cw).
inline Profile quantized_copy(const Profile& p)
{
    Profile q;
    for (std::size_t li = 0; li < p.loops.size(); ++li) {
        const auto& loop = p.loops[li];
        if (loop.is_circle()) {
            const auto& c = *loop.circle;
            q.loops.push_back(Loop::of_circle({snap_point(c.center), snap_length(c.radius), li == 0}));
            continue;
        }
        std::vector<Curve> cs;
        for (const auto& cv : loop.curves) {
            if (const auto* l = std::get_if<LineSegment>(&cv))
                cs.emplace_back(LineSegment{snap_point(l->start), snap_point(l->end)});
            else {
                const auto& a = std::get<ArcSegment>(cv);
                cs.emplace_back(ArcSegment{snap_point(a.start), snap_point(a.mid), snap_point(a.end)});
            }
        }
        q.loops.push_back(Loop::of_curves(std::move(cs)));
    }
    return q;
}

inline double snap_parameter(const Parameter& p)
{
    return p.kind == ParamKind::Length ? snap_length(p.value) : snap_angle(p.value);
}

// The value a sequence takes after a tokenize/detokenize round trip.
inline ConstructionSequence quantized_copy(const ConstructionSequence& s)
{
    ConstructionSequence q = s;
    q.prompt = quantized_copy(s.prompt);
    for (auto& p : q.parameters) p.value = snap_parameter(p);
    q.profile = quantized_copy(s.profile);
    return q;
}

inline std::size_t step_count(const ConstructionSequence& s)
{
    std::size_t n = 0;
    for (const auto& ins : s.program) n += std::holds_alternative<Step>(ins) ? 1 : 0;
    return n;
}

}  // namespace pforge
