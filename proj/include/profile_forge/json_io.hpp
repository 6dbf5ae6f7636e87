#pragma once

// JSON forms of profiles, prompts and sequences.
//
// point:    [x, y]
// line:     {"phi": a, "d": d}
// circle:   {"center": [x, y], "radius": r, "ccw": true}
// profile:  {"loops": [{"circle": circle} | {"curves": [{"line": [p, p]} | {"arc": [p, p, p]}]}]}
// sequence: {"prompt": ..., "parameters": [{"index", "kind", "value"}],
//            "program": [{"step": name, "inputs": [reg | {"param": n}], "outputs": [reg], "ccw"?}
//                        | {"curve": "line"|"arc"|"circle", "refs": [reg]}],
//            "profile": profile}

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "profile.hpp"
#include "sequence.hpp"

namespace pforge {

using nlohmann::json;

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline json to_json(Point2 p) { return json::array({p.x, p.y}); }

inline Point2 point_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 2) throw FormatError("point must be [x, y]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json to_json(const DirectedLine& l) { return {{"phi", l.phi}, {"d", l.d}}; }

inline DirectedLine line_from_json(const json& j)
{
    return DirectedLine::make(j.at("phi").get<double>(), j.at("d").get<double>());
}

inline json to_json(const OrientedCircle& c)
{
    return {{"center", to_json(c.center)}, {"radius", c.radius}, {"ccw", c.ccw}};
}

inline OrientedCircle circle_from_json(const json& j)
{
    return {point_from_json(j.at("center")), j.at("radius").get<double>(), j.value("ccw", true)};
}

inline json to_json(const Curve& c)
{
    if (const auto* l = std::get_if<LineSegment>(&c)) return {{"line", json::array({to_json(l->start), to_json(l->end)})}};
    const auto& a = std::get<ArcSegment>(c);
    return {{"arc", json::array({to_json(a.start), to_json(a.mid), to_json(a.end)})}};
}

inline Curve curve_from_json(const json& j)
{
    if (j.contains("line")) {
        const auto& p = j.at("line");
        if (!p.is_array() || p.size() != 2) throw FormatError("line needs 2 points");
        return LineSegment{point_from_json(p.at(0)), point_from_json(p.at(1))};
    }
    if (j.contains("arc")) {
        const auto& p = j.at("arc");
        if (!p.is_array() || p.size() != 3) throw FormatError("arc needs 3 points");
        return ArcSegment{point_from_json(p.at(0)), point_from_json(p.at(1)), point_from_json(p.at(2))};
    }
    throw FormatError("curve must be a line or an arc");
}

inline json to_json(const Profile& p)
{
    json loops = json::array();
    for (const auto& l : p.loops) {
        if (l.is_circle()) {
            loops.push_back({{"circle", to_json(*l.circle)}});
            continue;
        }
        json cs = json::array();
        for (const auto& c : l.curves) cs.push_back(to_json(c));
        loops.push_back({{"curves", cs}});
    }
    return {{"loops", loops}};
}

inline Profile profile_from_json(const json& j)
{
    Profile p;
    for (const auto& l : j.at("loops")) {
        if (l.contains("circle")) {
            p.loops.push_back(Loop::of_circle(circle_from_json(l.at("circle"))));
            continue;
        }
        std::vector<Curve> cs;
        for (const auto& c : l.at("curves")) cs.push_back(curve_from_json(c));
        p.loops.push_back(Loop::of_curves(std::move(cs)));
    }
    return p;
}

inline json to_json(const GeometricPrompt& p)
{
    json sym = json::array();
    for (const auto& l : p.symmetry_lines) sym.push_back(to_json(l));
    json bounds = json::array();
    for (const auto& b : p.bound_lines) bounds.push_back(json::array({to_json(b.start), to_json(b.end)}));
    json holes = json::array();
    for (const auto& h : p.bolt_holes)
        holes.push_back({{"center", to_json(h.center)}, {"radius", h.radius}, {"clearance", h.clearance}});
    return {
        {"datum", to_json(p.datum)},
        {"bbox", {{"min", to_json(p.bbox.min)}, {"max", to_json(p.bbox.max)}}},
        {"area", p.area},
        {"complexity", p.complexity},
        {"num_loops", p.num_loops},
        {"smooth_fraction", p.smooth_fraction},
        {"cog", to_json(p.cog)},
        {"symmetry_lines", sym},
        {"bound_lines", bounds},
        {"bolt_holes", holes},
    };
}

inline GeometricPrompt prompt_from_json(const json& j)
{
    GeometricPrompt p;
    p.datum = point_from_json(j.at("datum"));
    p.bbox = {point_from_json(j.at("bbox").at("min")), point_from_json(j.at("bbox").at("max"))};
    p.area = j.at("area").get<double>();
    p.complexity = j.at("complexity").get<int>();
    p.num_loops = j.at("num_loops").get<int>();
    p.smooth_fraction = j.at("smooth_fraction").get<double>();
    p.cog = point_from_json(j.at("cog"));
    for (const auto& l : j.value("symmetry_lines", json::array())) p.symmetry_lines.push_back(line_from_json(l));
    for (const auto& b : j.value("bound_lines", json::array()))
        p.bound_lines.push_back({point_from_json(b.at(0)), point_from_json(b.at(1))});
    for (const auto& h : j.value("bolt_holes", json::array()))
        p.bolt_holes.push_back(
            {point_from_json(h.at("center")), h.at("radius").get<double>(), h.at("clearance").get<double>()});
    return p;
}

inline std::string_view kind_name(ParamKind k) { return k == ParamKind::Length ? "length" : "angle"; }

inline json to_json(const Parameter& p)
{
    return {{"index", p.index}, {"kind", kind_name(p.kind)}, {"value", p.value}};
}

inline Parameter parameter_from_json(const json& j)
{
    const std::string k = j.at("kind").get<std::string>();
    if (k != "length" && k != "angle") throw FormatError("parameter kind must be length or angle");
    return {j.at("index").get<int>(), k == "length" ? ParamKind::Length : ParamKind::Angle, j.at("value").get<double>()};
}

inline std::string_view curve_kind_name(CurveKind k)
{
    switch (k) {
    case CurveKind::Line: return "line";
    case CurveKind::Arc: return "arc";
    case CurveKind::Circle: return "circle";
    }
    return "?";
}

inline json to_json(const Instruction& ins)
{
    if (const auto* st = std::get_if<Step>(&ins)) {
        json in = json::array();
        for (const auto& op : st->inputs) {
            if (op.is_param())
                in.push_back({{"param", op.index}});
            else
                in.push_back(op.index);
        }
        json j = {{"step", step_name(st->kind)}, {"inputs", in}, {"outputs", st->outputs}};
        if (st->kind == StepKind::PointRadiusCircle) j["ccw"] = st->ccw;
        return j;
    }
    const auto& ce = std::get<CurveEmit>(ins);
    return {{"curve", curve_kind_name(ce.kind)}, {"refs", ce.refs}};
}

inline Instruction instruction_from_json(const json& j)
{
    if (j.contains("step")) {
        Step st;
        auto k = step_from_name(j.at("step").get<std::string>());
        if (!k) throw FormatError("unknown step kind " + j.at("step").dump());
        st.kind = *k;
        for (const auto& op : j.at("inputs")) {
            if (op.is_object())
                st.inputs.push_back(Operand::param(op.at("param").get<int>()));
            else
                st.inputs.push_back(Operand::reg(op.get<int>()));
        }
        st.outputs = j.at("outputs").get<std::vector<int>>();
        st.ccw = j.value("ccw", true);
        return st;
    }
    CurveEmit ce;
    const std::string k = j.at("curve").get<std::string>();
    if (k == "line")
        ce.kind = CurveKind::Line;
    else if (k == "arc")
        ce.kind = CurveKind::Arc;
    else if (k == "circle")
        ce.kind = CurveKind::Circle;
    else
        throw FormatError("unknown curve kind " + k);
    ce.refs = j.at("refs").get<std::vector<int>>();
    return ce;
}

inline json to_json(const ConstructionSequence& s)
{
    json params = json::array();
    for (const auto& p : s.parameters) params.push_back(to_json(p));
    json prog = json::array();
    for (const auto& ins : s.program) prog.push_back(to_json(ins));
    return {{"prompt", to_json(s.prompt)}, {"parameters", params}, {"program", prog}, {"profile", to_json(s.profile)}};
}

inline ConstructionSequence sequence_from_json(const json& j)
{
    ConstructionSequence s;
    s.prompt = prompt_from_json(j.at("prompt"));
    for (const auto& p : j.value("parameters", json::array())) s.parameters.push_back(parameter_from_json(p));
    for (const auto& ins : j.at("program")) s.program.push_back(instruction_from_json(ins));
    if (j.contains("profile")) s.profile = profile_from_json(j.at("profile"));
    return s;
}

inline json to_json(const Geometry& g)
{
    if (const auto* p = std::get_if<Point2>(&g)) return {{"point", to_json(*p)}};
    if (const auto* l = std::get_if<DirectedLine>(&g)) return {{"line", to_json(*l)}};
    return {{"circle", to_json(std::get<OrientedCircle>(g))}};
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return json::parse(in);
}

inline void write_json_file(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace pforge
