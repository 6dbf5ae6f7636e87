#pragma once

// Vocabulary, tokenizer and strict detokenizer.
//
// Geometry referenced by a step or a created curve is written by value. The
// detokenizer links each such value to the most recent register carrying the
// same quantized encoding; the tokenizer refuses programs where that rule
// would pick a different register than the one intended.

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "quantize.hpp"
#include "sequence.hpp"
#include "vm.hpp"

namespace pforge {

enum class Special {
    StartOfPrompt,
    EndOfPrompt,
    DimensionDatum,
    BoundingBox,
    CenterOfGravity,
    SymmetryLines,
    BoundLines,
    BoltHoles,
    BoundLine,
    Arc,
    Circle,
    BoltHole,
    StartOfConstruction,
    EndOfConstruction,
    CreatedCurve,
    StartOfProfile,
    PolyArcLineLoop,
    SingleCircleLoop,
    ProfileLine,
    ProfileArc,
    EndOfProfile,
};

inline constexpr std::array<std::string_view, 21> kSpecialNames = {
    "StartOfPrompt",  "EndOfPrompt",       "DimensionDatum",   "BoundingBox",     "CenterOfGravity",
    "SymmetryLines",  "BoundLines",        "BoltHoles",        "BoundLine",       "Arc",
    "Circle",         "BoltHole",          "StartOfConstruction", "EndOfConstruction", "CreatedCurve",
    "StartOfProfile", "PolyArcLineLoop",   "SingleCircleLoop", "ProfileLine",     "ProfileArc",
    "EndOfProfile",
};

enum class Family {
    Special,
    Step,
    UseParameter,
    Length,
    Angle,
    Point,
    Infline,
    Area,
    Complexity,
    NumLoops,
    SmoothVertices,
    IsCCW,
};

struct FamilyRange {
    Family family;
    std::string_view name;
    int first;
    int count;
};

namespace detail {

inline constexpr std::array<std::pair<Family, std::pair<std::string_view, int>>, 12> kFamilySizes = {{
    {Family::Special, {"special", 21}},
    {Family::Step, {"step", 15}},
    {Family::UseParameter, {"use_parameter", kMaxParameters}},
    {Family::Length, {"length", kLengthBins}},
    {Family::Angle, {"angle", kAngleBins}},
    {Family::Point, {"point", kPointBins * kPointBins}},
    {Family::Infline, {"infline", kAngleBins * kLengthBins}},
    {Family::Area, {"area", kUnitBins}},
    {Family::Complexity, {"complexity", kCountBins}},
    {Family::NumLoops, {"num_loops", kCountBins}},
    {Family::SmoothVertices, {"smooth_vertices", kUnitBins}},
    {Family::IsCCW, {"is_ccw", 2}},
}};

}  // namespace detail

inline const std::array<FamilyRange, 12>& vocabulary()
{
    static const std::array<FamilyRange, 12> v = [] {
        std::array<FamilyRange, 12> out{};
        int next = 0;
        for (std::size_t i = 0; i < detail::kFamilySizes.size(); ++i) {
            const auto& [fam, info] = detail::kFamilySizes[i];
            out[i] = {fam, info.first, next, info.second};
            next += info.second;
        }
        return out;
    }();
    return v;
}

inline int vocabulary_size()
{
    const auto& v = vocabulary();
    return v.back().first + v.back().count;
}

inline int token_id(Family f, int value)
{
    const auto& r = vocabulary()[static_cast<std::size_t>(f)];
    if (value < 0 || value >= r.count) throw OutOfRange(std::string(r.name) + " token value out of range");
    return r.first + value;
}

struct DecodedToken {
    Family family;
    int value;
};

inline std::optional<DecodedToken> decode_token(int id)
{
    for (const auto& r : vocabulary())
        if (id >= r.first && id < r.first + r.count) return DecodedToken{r.family, id - r.first};
    return std::nullopt;
}

// Versioned text manifest of the id layout.
inline std::string vocabulary_manifest()
{
    std::ostringstream os;
    os << "profile-forge-vocab v1\n";
    os << "# family first_id count [names]\n";
    for (const auto& r : vocabulary()) {
        os << r.name << ' ' << r.first << ' ' << r.count;
        if (r.family == Family::Special)
            for (auto n : kSpecialNames) os << ' ' << n;
        if (r.family == Family::Step)
            for (auto k : kAllStepKinds) os << ' ' << step_name(k);
        os << '\n';
    }
    os << "# point value = ix * 127 + iy; infline value = angle_bin * 127 + dist_bin\n";
    return os.str();
}

// Quantized identity of a register value, used to link references.
struct Encoding {
    GeomType type = GeomType::Point;
    int a = 0;
    int b = 0;
    int c = 0;
    friend bool operator==(const Encoding&, const Encoding&) = default;
};

inline int point_value(PointBin b) { return b.ix * kPointBins + b.iy; }
inline PointBin point_bin(int v) { return {v / kPointBins, v % kPointBins}; }
inline int infline_value(InflineBin b) { return b.angle * kLengthBins + b.dist; }
inline InflineBin infline_bin(int v) { return {v / kLengthBins, v % kLengthBins}; }

inline Encoding encode_geometry(const Geometry& g)
{
    if (const auto* p = std::get_if<Point2>(&g)) return {GeomType::Point, point_value(quantize_point(*p)), 0, 0};
    if (const auto* l = std::get_if<DirectedLine>(&g))
        return {GeomType::Line, infline_value(quantize_infline(*l)), 0, 0};
    const auto& c = std::get<OrientedCircle>(g);
    return {GeomType::Circle, point_value(quantize_point(c.center)), quantize_length(c.radius), c.ccw ? 1 : 0};
}

inline Geometry decode_geometry(const Encoding& e)
{
    switch (e.type) {
    case GeomType::Point: return dequantize_point(point_bin(e.a));
    case GeomType::Line: return dequantize_infline(infline_bin(e.a));
    case GeomType::Circle: return OrientedCircle{dequantize_point(point_bin(e.a)), dequantize_length(e.b), e.c == 1};
    }
    return Point2{};
}

struct TokenizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

class Emitter {
public:
    std::vector<int> out;

    void special(Special s) { out.push_back(token_id(Family::Special, static_cast<int>(s))); }
    void tag(StepKind k) { out.push_back(token_id(Family::Step, static_cast<int>(k))); }
    void point(Point2 p) { out.push_back(token_id(Family::Point, point_value(quantize_point(p)))); }
    void infline(const DirectedLine& l) { out.push_back(token_id(Family::Infline, infline_value(quantize_infline(l)))); }
    void length(double v) { out.push_back(token_id(Family::Length, quantize_length(v))); }
    void angle(double v) { out.push_back(token_id(Family::Angle, quantize_angle(v))); }
    void flag(bool b) { out.push_back(token_id(Family::IsCCW, b ? 1 : 0)); }

    void encoding(const Encoding& e)
    {
        switch (e.type) {
        case GeomType::Point: out.push_back(token_id(Family::Point, e.a)); break;
        case GeomType::Line: out.push_back(token_id(Family::Infline, e.a)); break;
        case GeomType::Circle:
            special(Special::Circle);
            out.push_back(token_id(Family::Point, e.a));
            out.push_back(token_id(Family::Length, e.b));
            out.push_back(token_id(Family::IsCCW, e.c));
            break;
        }
    }
};

class RegisterTable {
public:
    void add(const Encoding& e) { encs_.push_back(e); }
    std::size_t size() const { return encs_.size(); }
    const Encoding& at(std::size_t i) const { return encs_[i]; }

    std::optional<int> latest(const Encoding& e) const
    {
        for (std::size_t i = encs_.size(); i-- > 0;)
            if (encs_[i] == e) return static_cast<int>(i);
        return std::nullopt;
    }

private:
    std::vector<Encoding> encs_;
};

inline void emit_prompt(Emitter& em, const GeometricPrompt& p)
{
    em.special(Special::StartOfPrompt);
    em.special(Special::DimensionDatum);
    em.point(p.datum);
    em.infline(p.datum_x_axis());
    em.infline(p.datum_y_axis());
    em.special(Special::BoundingBox);
    em.point(p.bbox.min);
    em.point(p.bbox.max);
    em.out.push_back(token_id(Family::Area, quantize_unit(p.area)));
    em.out.push_back(token_id(Family::Complexity, quantize_count(p.complexity)));
    em.out.push_back(token_id(Family::NumLoops, quantize_count(p.num_loops)));
    em.out.push_back(token_id(Family::SmoothVertices, quantize_unit(p.smooth_fraction)));
    em.special(Special::CenterOfGravity);
    em.point(p.cog);
    em.special(Special::SymmetryLines);
    for (const auto& l : p.symmetry_lines) em.infline(l);
    em.special(Special::BoundLines);
    for (const auto& b : p.bound_lines) {
        em.special(Special::BoundLine);
        em.point(b.start);
        em.point(b.end);
    }
    em.special(Special::BoltHoles);
    for (const auto& h : p.bolt_holes) {
        em.special(Special::BoltHole);
        em.point(h.center);
        em.length(h.radius);
        em.length(h.clearance);
    }
    em.special(Special::EndOfPrompt);
}

inline void emit_profile(Emitter& em, const Profile& prof)
{
    em.special(Special::StartOfProfile);
    for (const auto& loop : prof.loops) {
        if (loop.is_circle()) {
            em.special(Special::SingleCircleLoop);
            em.point(loop.circle->center);
            em.length(loop.circle->radius);
            continue;
        }
        em.special(Special::PolyArcLineLoop);
        for (const auto& cv : loop.curves) {
            if (const auto* l = std::get_if<LineSegment>(&cv)) {
                em.special(Special::ProfileLine);
                em.point(l->end);
            } else {
                const auto& a = std::get<ArcSegment>(cv);
                em.special(Special::ProfileArc);
                em.point(a.mid);
                em.point(a.end);
            }
        }
    }
    em.special(Special::EndOfProfile);
}

}  // namespace detail

inline std::vector<int> tokenize(const ConstructionSequence& seq)
{
    if (seq.parameters.size() > static_cast<std::size_t>(kMaxParameters))
        throw TooManyParameters("sequence has " + std::to_string(seq.parameters.size()) + " parameters");
    std::map<int, const Parameter*> params;
    for (const auto& p : seq.parameters) {
        if (p.index < 0 || p.index >= kMaxParameters) throw TooManyParameters("parameter index out of range");
        params[p.index] = &p;
    }

    detail::Emitter em;
    detail::emit_prompt(em, seq.prompt);

    const GeometricPrompt qp = quantized_copy(seq.prompt);
    detail::RegisterTable regs;
    for (const auto& pr : prompt_registers(qp)) regs.add(encode_geometry(pr.value));

    const detail::RawRun run = detail::run(seq, seq.parameters);
    if (!run.failures.empty())
        throw NoSolution("instruction " + std::to_string(run.failures.front().instruction) + " has no solution");

    auto reference = [&](int reg) {
        if (reg < 0 || static_cast<std::size_t>(reg) >= regs.size())
            throw InvalidReference("register " + std::to_string(reg) + " not defined");
        const Encoding& e = regs.at(static_cast<std::size_t>(reg));
        if (regs.latest(e) != reg)
            throw TokenizeError("register " + std::to_string(reg) + " is shadowed by a later identical encoding");
        em.encoding(e);
    };

    int next_param = 0;
    em.special(Special::StartOfConstruction);
    for (std::size_t ii = 0; ii < seq.program.size(); ++ii) {
        if (const auto* st = std::get_if<Step>(&seq.program[ii])) {
            em.tag(st->kind);
            const auto& sig = signature(st->kind);
            for (std::size_t k = 0; k < st->inputs.size(); ++k) {
                const Operand& op = st->inputs[k];
                if (op.is_param()) {
                    auto it = params.find(op.index);
                    if (it == params.end()) throw InvalidReference("parameter " + std::to_string(op.index) + " not defined");
                    if (op.index > next_param) throw TokenizeError("parameter indices are not in first-use order");
                    if (op.index == next_param) ++next_param;
                    const Parameter& p = *it->second;
                    em.out.push_back(token_id(Family::UseParameter, op.index));
                    if (sig.inputs[k] == Slot::Length)
                        em.length(p.value);
                    else
                        em.angle(p.value);
                } else {
                    reference(op.index);
                }
            }
            const auto& outs = run.trace[ii].outputs;
            std::vector<Encoding> encs;
            for (const auto& g : outs) encs.push_back(encode_geometry(*g));
            if (st->kind == StepKind::LineLineFillet) {
                em.special(Special::Arc);
                for (const auto& e : encs) em.out.push_back(token_id(Family::Point, e.a));
            } else {
                for (const auto& e : encs) em.encoding(e);
            }
            for (const auto& e : encs) regs.add(e);
        } else {
            const auto& ce = std::get<CurveEmit>(seq.program[ii]);
            em.special(Special::CreatedCurve);
            if (ce.kind == CurveKind::Line) {
                em.special(Special::BoundLine);
            } else if (ce.kind == CurveKind::Arc) {
                em.special(Special::Arc);
            }
            for (int ref : ce.refs) reference(ref);
        }
    }
    em.special(Special::EndOfConstruction);
    detail::emit_profile(em, seq.profile);
    return em.out;
}

namespace detail {

class Parser {
public:
    explicit Parser(const std::vector<int>& t) : toks_(t) {}

    std::size_t pos() const { return pos_; }
    bool at_end() const { return pos_ >= toks_.size(); }

    [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(pos_, what); }

    std::optional<DecodedToken> peek() const
    {
        if (at_end()) return std::nullopt;
        return decode_token(toks_[pos_]);
    }

    DecodedToken next(const char* expecting)
    {
        if (at_end()) fail(std::string("unexpected end of stream, expected ") + expecting);
        auto d = decode_token(toks_[pos_]);
        if (!d) fail("unknown token id " + std::to_string(toks_[pos_]));
        ++pos_;
        return *d;
    }

    int value(Family f, const char* what)
    {
        const std::size_t at = pos_;
        auto d = next(what);
        if (d.family != f) throw SyntaxError(at, std::string("expected ") + what);
        return d.value;
    }

    void expect(Special s)
    {
        const std::size_t at = pos_;
        auto d = next(kSpecialNames[static_cast<std::size_t>(s)].data());
        if (d.family != Family::Special || d.value != static_cast<int>(s))
            throw SyntaxError(at, std::string("expected ") + kSpecialNames[static_cast<std::size_t>(s)].data());
    }

    bool peek_special(Special s) const
    {
        auto d = peek();
        return d && d->family == Family::Special && d->value == static_cast<int>(s);
    }

    bool peek_family(Family f) const
    {
        auto d = peek();
        return d && d->family == f;
    }

    Point2 point() { return dequantize_point(point_bin(value(Family::Point, "Point"))); }
    DirectedLine infline() { return dequantize_infline(infline_bin(value(Family::Infline, "Infline"))); }
    double length() { return dequantize_length(value(Family::Length, "Length")); }

    Encoding entity(GeomType t)
    {
        switch (t) {
        case GeomType::Point: return {t, value(Family::Point, "Point"), 0, 0};
        case GeomType::Line: return {t, value(Family::Infline, "Infline"), 0, 0};
        case GeomType::Circle: {
            expect(Special::Circle);
            const int c = value(Family::Point, "Point");
            const int r = value(Family::Length, "Length");
            const int f = value(Family::IsCCW, "IsCCW");
            return {t, c, r, f};
        }
        }
        fail("bad entity");
    }

private:
    const std::vector<int>& toks_;
    std::size_t pos_ = 0;
};

inline GeometricPrompt parse_prompt(Parser& ps)
{
    GeometricPrompt p;
    ps.expect(Special::StartOfPrompt);
    ps.expect(Special::DimensionDatum);
    p.datum = ps.point();
    (void)ps.infline();
    (void)ps.infline();
    ps.expect(Special::BoundingBox);
    p.bbox.min = ps.point();
    p.bbox.max = ps.point();
    p.area = dequantize_unit(ps.value(Family::Area, "Area"));
    p.complexity = dequantize_count(ps.value(Family::Complexity, "Complexity"));
    p.num_loops = dequantize_count(ps.value(Family::NumLoops, "NumLoops"));
    p.smooth_fraction = dequantize_unit(ps.value(Family::SmoothVertices, "SmoothVertices"));
    ps.expect(Special::CenterOfGravity);
    p.cog = ps.point();
    ps.expect(Special::SymmetryLines);
    while (ps.peek_family(Family::Infline)) p.symmetry_lines.push_back(ps.infline());
    ps.expect(Special::BoundLines);
    while (ps.peek_special(Special::BoundLine)) {
        ps.expect(Special::BoundLine);
        LineSegment s;
        s.start = ps.point();
        s.end = ps.point();
        p.bound_lines.push_back(s);
    }
    ps.expect(Special::BoltHoles);
    while (ps.peek_special(Special::BoltHole)) {
        ps.expect(Special::BoltHole);
        BoltHole h;
        h.center = ps.point();
        h.radius = ps.length();
        h.clearance = ps.length();
        p.bolt_holes.push_back(h);
    }
    ps.expect(Special::EndOfPrompt);
    return p;
}

inline Profile parse_profile(Parser& ps)
{
    Profile prof;
    ps.expect(Special::StartOfProfile);
    for (;;) {
        if (ps.peek_special(Special::EndOfProfile)) break;
        const std::size_t at = ps.pos();
        auto d = ps.next("loop marker or EndOfProfile");
        if (d.family != Family::Special) throw SyntaxError(at, "expected loop marker");
        const auto s = static_cast<Special>(d.value);
        if (s == Special::SingleCircleLoop) {
            const Point2 c = ps.point();
            const double r = ps.length();
            prof.loops.push_back(Loop::of_circle({c, r, prof.loops.empty()}));
            continue;
        }
        if (s != Special::PolyArcLineLoop) throw SyntaxError(at, "expected loop marker");
        struct Piece {
            bool arc;
            Point2 mid;
            Point2 end;
        };
        std::vector<Piece> pieces;
        for (;;) {
            if (ps.peek_special(Special::ProfileLine)) {
                ps.expect(Special::ProfileLine);
                pieces.push_back({false, {}, ps.point()});
            } else if (ps.peek_special(Special::ProfileArc)) {
                ps.expect(Special::ProfileArc);
                const Point2 m = ps.point();
                pieces.push_back({true, m, ps.point()});
            } else {
                break;
            }
        }
        if (pieces.empty()) ps.fail("empty loop");
        std::vector<Curve> curves;
        Point2 prev = pieces.back().end;
        for (const auto& pc : pieces) {
            if (pc.arc)
                curves.emplace_back(ArcSegment{prev, pc.mid, pc.end});
            else
                curves.emplace_back(LineSegment{prev, pc.end});
            prev = pc.end;
        }
        prof.loops.push_back(Loop::of_curves(std::move(curves)));
    }
    ps.expect(Special::EndOfProfile);
    if (!ps.at_end()) ps.fail("tokens after EndOfProfile");
    return prof;
}

}  // namespace detail

inline ConstructionSequence detokenize(const std::vector<int>& tokens)
{
    detail::Parser ps(tokens);
    ConstructionSequence seq;
    seq.prompt = detail::parse_prompt(ps);

    detail::RegisterTable regs;
    for (const auto& pr : prompt_registers(seq.prompt)) regs.add(encode_geometry(pr.value));

    std::vector<int> param_bins;
    auto resolve = [&](GeomType t) {
        const std::size_t at = ps.pos();
        const Encoding e = ps.entity(t);
        auto r = regs.latest(e);
        if (!r) throw SyntaxError(at, "reference to geometry that was never constructed");
        return *r;
    };

    ps.expect(Special::StartOfConstruction);
    for (;;) {
        if (ps.peek_special(Special::EndOfConstruction)) break;
        const std::size_t at = ps.pos();
        auto d = ps.next("construction step");
        if (d.family == Family::Step) {
            Step st;
            st.kind = static_cast<StepKind>(d.value);
            const auto& sig = signature(st.kind);
            for (Slot slot : sig.inputs) {
                if (!is_scalar(slot)) {
                    st.inputs.push_back(Operand::reg(resolve(static_cast<GeomType>(slot))));
                    continue;
                }
                const std::size_t pat = ps.pos();
                const int idx = ps.value(Family::UseParameter, "UseParameterN");
                const bool is_len = slot == Slot::Length;
                const int bin = ps.value(is_len ? Family::Length : Family::Angle, is_len ? "Length" : "Angle");
                const int n = static_cast<int>(seq.parameters.size());
                if (idx > n) throw SyntaxError(pat, "parameter index skips an unused index");
                const ParamKind kind = is_len ? ParamKind::Length : ParamKind::Angle;
                if (idx == n) {
                    seq.parameters.push_back({idx, kind, is_len ? dequantize_length(bin) : dequantize_angle(bin)});
                    param_bins.push_back(bin);
                } else {
                    if (seq.parameters[static_cast<std::size_t>(idx)].kind != kind)
                        throw SyntaxError(pat, "parameter kind conflicts with earlier use");
                    if (param_bins[static_cast<std::size_t>(idx)] != bin)
                        throw SyntaxError(pat, "parameter value conflicts with earlier use");
                }
                st.inputs.push_back(Operand::param(idx));
            }
            std::vector<Encoding> outs;
            if (st.kind == StepKind::LineLineFillet) {
                ps.expect(Special::Arc);
                for (int k = 0; k < 3; ++k) outs.push_back(ps.entity(GeomType::Point));
            } else {
                for (GeomType t : sig.outputs) outs.push_back(ps.entity(t));
            }
            if (st.kind == StepKind::PointRadiusCircle) st.ccw = outs[0].c == 1;
            for (const auto& e : outs) {
                st.outputs.push_back(static_cast<int>(regs.size()));
                regs.add(e);
            }
            seq.program.emplace_back(std::move(st));
        } else if (d.family == Family::Special && d.value == static_cast<int>(Special::CreatedCurve)) {
            CurveEmit ce;
            if (ps.peek_special(Special::BoundLine)) {
                ps.expect(Special::BoundLine);
                ce.kind = CurveKind::Line;
                for (int k = 0; k < 2; ++k) ce.refs.push_back(resolve(GeomType::Point));
            } else if (ps.peek_special(Special::Arc)) {
                ps.expect(Special::Arc);
                ce.kind = CurveKind::Arc;
                for (int k = 0; k < 3; ++k) ce.refs.push_back(resolve(GeomType::Point));
            } else if (ps.peek_special(Special::Circle)) {
                ce.kind = CurveKind::Circle;
                ce.refs.push_back(resolve(GeomType::Circle));
            } else {
                ps.fail("expected BoundLine, Arc or Circle after CreatedCurve");
            }
            seq.program.emplace_back(std::move(ce));
        } else {
            throw SyntaxError(at, "expected a step tag, CreatedCurve or EndOfConstruction");
        }
    }
    ps.expect(Special::EndOfConstruction);
    seq.profile = detail::parse_profile(ps);
    return seq;
}

inline constexpr std::string_view kTokenFileHeader = "profile-forge-tokens v1";

inline void write_tokens(std::ostream& os, const std::vector<int>& tokens)
{
    os << kTokenFileHeader << '\n';
    for (std::size_t i = 0; i < tokens.size(); ++i) os << tokens[i] << ((i + 1) % 32 == 0 ? '\n' : ' ');
    os << '\n';
}

inline std::vector<int> read_tokens(std::istream& is)
{
    std::string header;
    std::getline(is, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kTokenFileHeader) throw std::runtime_error("not a token file (bad header)");
    std::vector<int> out;
    std::string w;
    while (is >> w) {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(w, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != w.size() || v < 0 || v > 100000000) throw std::runtime_error("bad token id '" + w + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

}  // namespace pforge
