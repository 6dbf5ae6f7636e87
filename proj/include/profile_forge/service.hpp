#pragma once

// HTTP surface for the parametric editor.
//
//   GET  /sequences                 ids with parameter and step counts
//   GET  /sequences/{id}            sequence, parameter table, default replay
//   POST /sequences/{id}/replay     body {"overrides": {"<index>": value}}

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <httplib.h>

#include "errors.hpp"
#include "json_io.hpp"
#include "quantize.hpp"
#include "svg.hpp"
#include "vm.hpp"

namespace pforge {

using SequenceMap = std::map<std::string, ConstructionSequence>;

// id -> sequence, loaded from *.json files in a directory. Readers take a
// snapshot; reload swaps the whole map at once.
class SequenceStore {
public:
    SequenceStore() : snap_(std::make_shared<const SequenceMap>()) {}
    explicit SequenceStore(SequenceMap m) : snap_(std::make_shared<const SequenceMap>(std::move(m))) {}

    static SequenceMap load_dir(const std::filesystem::path& dir)
    {
        SequenceMap m;
        if (!std::filesystem::is_directory(dir)) throw std::ios_base::failure("not a directory: " + dir.string());
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            if (!e.is_regular_file() || e.path().extension() != ".json") continue;
            m.emplace(e.path().stem().string(), sequence_from_json(read_json_file(e.path().string())));
        }
        return m;
    }

    void reload(const std::filesystem::path& dir)
    {
        auto fresh = std::make_shared<const SequenceMap>(load_dir(dir));
        std::lock_guard lock(mu_);
        snap_ = std::move(fresh);
    }

    std::shared_ptr<const SequenceMap> snapshot() const
    {
        std::lock_guard lock(mu_);
        return snap_;
    }

private:
    mutable std::mutex mu_;
    std::shared_ptr<const SequenceMap> snap_;
};

struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Slider range for a parameter: the span the quantizer can encode.
inline json parameter_domain(const Parameter& p)
{
    json j = to_json(p);
    if (p.kind == ParamKind::Length) {
        j["min"] = -1.0;
        j["max"] = 1.0;
    } else {
        j["min"] = 0.0;
        j["max"] = kTwoPi;
    }
    return j;
}

// Overrides from a request body, checked against the parameter table and the
// quantizer domain.
inline Overrides parse_overrides(const ConstructionSequence& seq, const json& body)
{
    Overrides ov;
    if (body.is_null()) return ov;
    if (!body.is_object()) throw BadRequest("body must be a JSON object");
    const auto it = body.find("overrides");
    if (it == body.end() || it->is_null()) return ov;
    if (!it->is_object()) throw BadRequest("overrides must map parameter index to value");
    for (const auto& [key, val] : it->items()) {
        int idx = 0;
        try {
            std::size_t used = 0;
            idx = std::stoi(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw BadRequest("bad parameter index '" + key + "'");
        }
        if (!val.is_number()) throw BadRequest("value for parameter " + key + " is not a number");
        const double v = val.get<double>();
        const Parameter* p = nullptr;
        for (const auto& q : seq.parameters)
            if (q.index == idx) p = &q;
        if (!p) throw BadRequest("no parameter " + key);
        try {
            if (p->kind == ParamKind::Length)
                (void)quantize_length(v);
            else
                (void)quantize_angle(v);
        } catch (const OutOfRange& e) {
            throw BadRequest("parameter " + key + ": " + e.what());
        }
        ov[idx] = v;
    }
    return ov;
}

inline std::string_view status_name(StepStatus s)
{
    switch (s) {
    case StepStatus::Ok: return "ok";
    case StepStatus::Failed: return "failed";
    case StepStatus::Skipped: return "skipped";
    }
    return "?";
}

inline json to_json(const TraceRecord& r)
{
    json j{{"instruction", r.instruction}, {"status", status_name(r.status)}};
    if (r.kind) j["step"] = step_name(*r.kind);
    if (r.is_curve) j["curve"] = true;
    json outs = json::array();
    for (const auto& o : r.outputs) outs.push_back(o ? to_json(*o) : json(nullptr));
    j["outputs"] = outs;
    if (r.curve) j["geometry"] = to_json(*r.curve);
    if (r.circle) j["geometry"] = to_json(*r.circle);
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

inline json replay_json(const ConstructionSequence& seq, const Overrides& ov)
{
    const ReplayResult r = replay(seq, ov);
    json trace = json::array();
    json flags = json::array();
    for (const auto& t : r.trace) {
        trace.push_back(to_json(t));
        flags.push_back(t.status == StepStatus::Ok);
    }
    json failures = json::array();
    for (const auto& f : r.failures) {
        json fj{{"instruction", f.instruction}, {"cause", cause_name(f.cause)}, {"message", f.message}};
        if (const auto* st = std::get_if<Step>(&seq.program[f.instruction])) fj["step"] = step_name(st->kind);
        failures.push_back(fj);
    }
    return {{"ok", r.ok()},       {"profile", to_json(r.profile)},
            {"svg", render_svg(r.profile, &seq.prompt)},
            {"trace", trace},     {"success", flags},
            {"failures", failures}, {"open_loops", r.open_loops}};
}

inline json sequence_detail_json(const std::string& id, const ConstructionSequence& seq)
{
    json params = json::array();
    for (const auto& p : seq.parameters) params.push_back(parameter_domain(p));
    json j = replay_json(seq, {});
    j["id"] = id;
    j["sequence"] = to_json(seq);
    j["parameters"] = params;
    return j;
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& j)
{
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& msg)
{
    send_json(res, status, json{{"error", msg}});
}

}  // namespace detail

inline void install_routes(httplib::Server& srv, const SequenceStore& store)
{
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    srv.Get("/sequences", [&store](const httplib::Request&, httplib::Response& res) {
        const auto snap = store.snapshot();
        json out = json::array();
        for (const auto& [id, seq] : *snap)
            out.push_back({{"id", id}, {"parameters", seq.parameters.size()}, {"steps", step_count(seq)}});
        detail::send_json(res, 200, out);
    });

    srv.Get(R"(/sequences/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
        const auto snap = store.snapshot();
        const std::string id = req.matches[1];
        const auto it = snap->find(id);
        if (it == snap->end()) return detail::send_error(res, 404, "unknown sequence '" + id + "'");
        detail::send_json(res, 200, sequence_detail_json(id, it->second));
    });

    srv.Post(R"(/sequences/([^/]+)/replay)", [&store](const httplib::Request& req, httplib::Response& res) {
        const auto snap = store.snapshot();
        const std::string id = req.matches[1];
        const auto it = snap->find(id);
        if (it == snap->end()) return detail::send_error(res, 404, "unknown sequence '" + id + "'");
        json body;
        if (!req.body.empty()) {
            body = json::parse(req.body, nullptr, false);
            if (body.is_discarded()) return detail::send_error(res, 400, "body is not valid JSON");
        }
        try {
            const Overrides ov = parse_overrides(it->second, body);
            detail::send_json(res, 200, replay_json(it->second, ov));
        } catch (const BadRequest& e) {
            detail::send_error(res, 400, e.what());
        }
    });

    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            detail::send_error(res, 500, e.what());
        } catch (...) {
            detail::send_error(res, 500, "internal error");
        }
    });
}

}  // namespace pforge
