// pforge: command line front end.
//
// Exit codes: 0 ok, 1 usage, 2 geometric failure, 3 I/O.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "profile_forge/profile_forge.hpp"

namespace fs = std::filesystem;
using namespace pforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitGeometry = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<fs::path> json_files(const fs::path& dir)
{
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) throw std::ios_base::failure("not a directory: " + dir.string());
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

void write_text(const fs::path& path, const std::string& s)
{
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    out << s;
}

// A file holding either a sequence (JSON) or a token stream.
ConstructionSequence load_sequence(const std::string& path)
{
    if (fs::path(path).extension() == ".json") return sequence_from_json(read_json_file(path));
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return detokenize(read_tokens(in));
}

Profile load_profile(const std::string& path)
{
    const json j = read_json_file(path);
    if (j.contains("loops")) return profile_from_json(j);
    if (j.contains("program")) return sequence_from_json(j).profile;
    throw FormatError(path + ": neither a profile nor a sequence");
}

std::string fmt(std::optional<double> v)
{
    if (!v) return "";
    std::ostringstream os;
    os.precision(9);
    os << *v;
    return os.str();
}

std::string csv_header(const std::vector<std::string>& cols)
{
    std::string s = "file";
    for (const auto& c : cols) s += "," + c;
    return s;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
    std::string input, output;
    std::uint64_t seed = 0;
};

int cmd_extract(const ExtractArgs& a)
{
    const auto files = json_files(a.input);
    struct Item {
        std::string hash;
        fs::path file;
        Profile profile;
    };
    std::map<std::string, Item> unique;
    std::size_t dups = 0, bad = 0;
    for (const auto& f : files) {
        Profile p;
        try {
            p = load_profile(f.string());
        } catch (const FormatError& e) {
            std::cerr << f.filename().string() << ": " << e.what() << "\n";
            ++bad;
            continue;
        } catch (const json::exception& e) {
            std::cerr << f.filename().string() << ": " << e.what() << "\n";
            ++bad;
            continue;
        }
        std::string h;
        try {
            h = profile_graph_hash(p);
        } catch (const DegenerateProfile& e) {
            std::cerr << f.filename().string() << ": " << e.what() << "\n";
            ++bad;
            continue;
        }
        if (!unique.emplace(h, Item{h, f, std::move(p)}).second) ++dups;
    }

    // hash order, then a seeded shuffle
    std::vector<Item*> order;
    for (auto& [h, it] : unique) order.push_back(&it);
    std::mt19937_64 rng(a.seed);
    std::shuffle(order.begin(), order.end(), rng);

    struct Done {
        std::string name;
        ConstructionSequence seq;
    };
    std::vector<Done> done;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        try {
            Extraction ex = extract(order[i]->profile, a.seed + i);
            done.push_back({order[i]->file.stem().string(), std::move(ex.sequence)});
        } catch (const std::exception& e) {
            std::cerr << order[i]->file.filename().string() << ": " << e.what() << "\n";
            ++failed;
        }
    }

    const std::size_t n = done.size();
    const std::size_t n_test = n * 2 / 100, n_val = n * 3 / 100;
    const std::size_t n_train = n - n_test - n_val;
    json manifest{{"seed", a.seed}, {"inputs", files.size()}, {"duplicates", dups},
                  {"unreadable", bad}, {"failed", failed}, {"train", json::array()},
                  {"validation", json::array()}, {"test", json::array()}};
    for (const char* split : {"train", "validation", "test"}) fs::create_directories(fs::path(a.output) / split);
    for (std::size_t i = 0; i < n; ++i) {
        const char* split = i < n_train ? "train" : i < n_train + n_val ? "validation" : "test";
        const fs::path dir = fs::path(a.output) / split;
        write_json_file((dir / (done[i].name + ".json")).string(), to_json(done[i].seq));
        std::ofstream tok(dir / (done[i].name + ".tokens"));
        if (!tok) throw std::ios_base::failure("cannot write tokens for " + done[i].name);
        write_tokens(tok, tokenize(done[i].seq));
        manifest[split].push_back(done[i].name);
    }
    write_json_file((fs::path(a.output) / "manifest.json").string(), manifest);
    std::cout << files.size() << " inputs, " << dups << " duplicates, " << failed << " failed, " << n
              << " sequences (" << n_train << "/" << n_val << "/" << n_test << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ReplayArgs {
    std::string file;
    std::vector<std::string> params;
    std::string svg;
    std::string out;
    bool lenient = false;
};

Overrides parse_param_flags(const ConstructionSequence& seq, const std::vector<std::string>& flags)
{
    Overrides ov;
    for (const auto& f : flags) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) throw UsageError("--param expects N=V, got '" + f + "'");
        int idx = 0;
        double v = 0.0;
        try {
            idx = std::stoi(f.substr(0, eq));
            v = std::stod(f.substr(eq + 1));
        } catch (const std::exception&) {
            throw UsageError("--param expects N=V, got '" + f + "'");
        }
        const bool known = std::any_of(seq.parameters.begin(), seq.parameters.end(),
                                       [&](const Parameter& p) { return p.index == idx; });
        if (!known) throw UsageError("no parameter " + std::to_string(idx));
        ov[idx] = v;
    }
    return ov;
}

int cmd_replay(const ReplayArgs& a)
{
    const ConstructionSequence seq = load_sequence(a.file);
    const Overrides ov = parse_param_flags(seq, a.params);
    const ReplayResult r = replay(seq, ov);
    std::size_t steps = 0, curves = 0;
    for (const auto& t : r.trace) (t.is_curve ? curves : steps) += 1;
    std::cout << steps << " steps, " << curves << " curves, " << r.profile.loops.size() << " loops\n";
    for (const auto& f : r.failures) {
        std::cout << "StepFailed instruction " << f.instruction;
        if (const auto* st = std::get_if<Step>(&seq.program[f.instruction])) std::cout << " " << step_name(st->kind);
        std::cout << " " << cause_name(f.cause) << ": " << f.message << "\n";
    }
    if (!a.svg.empty()) write_text(a.svg, render_svg(r.profile, &seq.prompt));
    if (!a.out.empty()) write_json_file(a.out, to_json(r.profile));
    return r.ok() || a.lenient ? kExitOk : kExitGeometry;
}

// ---------------------------------------------------------------------------

int cmd_tokenize(const std::string& file, const std::string& out)
{
    const ConstructionSequence seq = sequence_from_json(read_json_file(file));
    const auto toks = tokenize(seq);
    if (out.empty()) {
        write_tokens(std::cout, toks);
        return kExitOk;
    }
    std::ofstream os(out);
    if (!os) throw std::ios_base::failure("cannot write " + out);
    write_tokens(os, toks);
    return kExitOk;
}

int cmd_detokenize(const std::string& file, const std::string& out)
{
    const ConstructionSequence seq = load_sequence(file);
    const json j = to_json(seq);
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json_file(out, j);
    return kExitOk;
}

// ---------------------------------------------------------------------------

// Token stream or sequence -> replayed profile, or nullopt when the stream
// does not parse or the program does not run.
struct Evaluated {
    std::optional<ConstructionSequence> seq;
    Profile profile;
    ValidityReport validity;
};

Evaluated evaluate(const std::string& file)
{
    Evaluated ev;
    try {
        ev.seq = load_sequence(file);
    } catch (const SyntaxError&) {
        return ev;
    } catch (const FormatError&) {
        return ev;
    }
    if (!validate_topology(*ev.seq).empty()) return ev;
    const ReplayResult r = replay(*ev.seq);
    if (!r.ok() || !r.open_loops.empty() || r.profile.loops.empty()) return ev;
    ev.profile = r.profile;
    ev.validity = validity_of(r.profile);
    return ev;
}

int cmd_validate(const std::vector<std::string>& files)
{
    const auto& cols = report_columns();
    std::cout << csv_header({cols[0], cols[1], cols[2]}) << "\n";
    for (const auto& f : files) {
        const Evaluated ev = evaluate(f);
        const auto& v = ev.validity;
        std::cout << f << "," << v.syntactic_valid << "," << v.self_intersection_free << "," << v.no_short_edges << "\n";
    }
    return kExitOk;
}

int cmd_metrics(const std::vector<std::string>& files)
{
    std::cout << csv_header(report_columns()) << "\n";
    for (const auto& f : files) {
        const Evaluated ev = evaluate(f);
        const auto& v = ev.validity;
        std::cout << f << "," << v.syntactic_valid << "," << v.self_intersection_free << "," << v.no_short_edges;
        if (!v.syntactic_valid) {
            std::cout << std::string(8, ',') << "\n";
            continue;
        }
        const PromptScore s = score_prompt(ev.seq->prompt, ev.profile);
        for (auto x : {std::optional<double>(s.area_diff), s.line_segment_dist, s.line_segment_ratio,
                       std::optional<double>(s.cog_dist), s.hole_center_dist, s.mirror_iou,
                       std::optional<double>(s.bbox_iou), std::optional<double>(s.smooth_fraction_diff)})
            std::cout << "," << fmt(x);
        std::cout << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct RewardArgs {
    std::string records;
    std::string estimator = "grpo";
    std::string presets;
};

// JSON lines: {"prompt": id, "tokens": path, "greedy": bool?, "logp": x?, "ref_logp": y?}
int cmd_rewards(const RewardArgs& a)
{
    std::ifstream in(a.records);
    if (!in) throw std::ios_base::failure("cannot open " + a.records);
    const fs::path base = fs::path(a.records).parent_path();

    EstimatorConfig ecfg;
    RewardConfig rcfg;
    if (!a.presets.empty()) {
        const json p = read_json_file(a.presets);
        const json& e = p.at(a.estimator);
        ecfg.beta = e.value("kl_penalty", ecfg.beta);
        ecfg.epsilon = e.value("clip_ratio", ecfg.epsilon);
        ecfg.group_size = e.value("group_size", ecfg.group_size);
    }

    struct Rec {
        json raw;
        double reward = 0.0;
    };
    std::map<std::string, std::vector<Rec>> groups;
    std::vector<std::string> order;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json r = json::parse(line, nullptr, false);
        if (r.is_discarded() || !r.contains("prompt") || !r.contains("tokens"))
            throw UsageError("bad record: " + line);
        fs::path tok = r.at("tokens").get<std::string>();
        if (tok.is_relative()) tok = base / tok;
        const double reward = composite_reward(evaluate(tok.string()).validity, rcfg);
        const std::string id = r.at("prompt").is_string() ? r.at("prompt").get<std::string>() : r.at("prompt").dump();
        if (!groups.count(id)) order.push_back(id);
        groups[id].push_back({std::move(r), reward});
    }

    for (const auto& id : order) {
        const auto& g = groups[id];
        std::vector<double> rewards;
        std::optional<double> greedy;
        std::vector<const Rec*> samples;
        for (const auto& r : g) {
            if (r.raw.value("greedy", false)) {
                greedy = r.reward;
                continue;
            }
            rewards.push_back(r.reward);
            samples.push_back(&r);
        }
        std::vector<double> adv;
        if (a.estimator == "grpo")
            adv = grpo_advantages(rewards);
        else if (a.estimator == "rloo")
            adv = rloo_advantages(rewards);
        else if (a.estimator == "remax") {
            if (!greedy) throw UsageError("prompt " + id + " has no greedy record");
            adv = remax_advantages(*greedy, rewards);
        } else
            throw UsageError("unknown estimator " + a.estimator);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            json out{{"prompt", samples[i]->raw.at("prompt")}, {"tokens", samples[i]->raw.at("tokens")},
                     {"reward", rewards[i]}, {"advantage", adv[i]}};
            if (samples[i]->raw.contains("logp") && samples[i]->raw.contains("ref_logp")) {
                const double psi = std::exp(samples[i]->raw.at("ref_logp").get<double>() -
                                            samples[i]->raw.at("logp").get<double>());
                out["kl"] = kl_k3(psi);
                if (a.estimator == "grpo") out["objective"] = grpo_objective_term(psi, adv[i], ecfg);
            }
            std::cout << out.dump() << "\n";
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

// Congruent copies are rescaled, shifted copies of earlier profiles, for
// exercising deduplication.
int cmd_gen_corpus(std::size_t n, std::size_t copies, std::uint64_t seed, const std::string& out)
{
    fs::create_directories(out);
    CorpusGenerator gen(seed);
    const std::size_t total = n + copies;
    const std::size_t width = std::to_string(total).size();
    auto name_of = [&](std::size_t i, std::string_view tag) {
        const std::string num = std::to_string(i);
        return std::string(width - num.size(), '0') + num + "_" + std::string(tag) + ".json";
    };
    std::vector<Profile> made;
    for (std::size_t i = 0; i < n; ++i) {
        const ShapeFamily f = gen.pick_family();
        made.push_back(gen.make(f));
        write_json_file((fs::path(out) / name_of(i, family_name(f))).string(), to_json(made.back()));
    }
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (std::size_t k = 0; k < copies && !made.empty(); ++k) {
        const std::size_t src = std::uniform_int_distribution<std::size_t>(0, made.size() - 1)(rng);
        const double s = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
        const Point2 off{std::uniform_real_distribution<double>(-50, 50)(rng),
                         std::uniform_real_distribution<double>(-50, 50)(rng)};
        write_json_file((fs::path(out) / name_of(n + k, "copy_of_" + std::to_string(src))).string(),
                        to_json(transformed(made[src], s, off)));
    }
    std::cout << total << " profiles written to " << out << "\n";
    return kExitOk;
}

int cmd_svg(const std::string& file, const std::string& out)
{
    std::string svg;
    const json j = read_json_file(file);
    if (j.contains("program")) {
        const ConstructionSequence seq = sequence_from_json(j);
        svg = render_svg(replay(seq).profile, &seq.prompt);
    } else {
        svg = render_svg(profile_from_json(j));
    }
    if (out.empty())
        std::cout << svg;
    else
        write_text(out, svg);
    return kExitOk;
}

int cmd_serve(std::string data, const std::string& host, int port)
{
    if (data.empty()) {
        const char* env = std::getenv("PROFILE_FORGE_DATA");
        if (!env) throw UsageError("no store: pass --data or set PROFILE_FORGE_DATA");
        data = env;
    }
    SequenceStore store(SequenceStore::load_dir(data));
    httplib::Server srv;
    install_routes(srv, store);
    std::cout << "serving " << store.snapshot()->size() << " sequences from " << data << " on " << host << ":"
              << port << std::endl;
    if (!srv.listen(host, port)) throw std::ios_base::failure("cannot listen on port " + std::to_string(port));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"profile-forge: 2D profile construction sequences"};
    app.require_subcommand(1);

    ExtractArgs ea;
    auto* ex = app.add_subcommand("extract", "profiles -> deduplicated construction sequences with splits");
    ex->add_option("input", ea.input, "directory of profile JSON files")->required();
    ex->add_option("output", ea.output, "output directory")->required();
    ex->add_option("--seed", ea.seed, "split and prompt seed");

    ReplayArgs ra;
    auto* rp = app.add_subcommand("replay", "run a sequence, optionally with parameter overrides");
    rp->add_option("file", ra.file, "sequence JSON or token file")->required();
    rp->add_option("--param", ra.params, "override, N=V (repeatable)");
    rp->add_option("--svg", ra.svg, "write the replayed profile as SVG");
    rp->add_option("-o,--out", ra.out, "write the replayed profile as JSON");
    rp->add_flag("--lenient", ra.lenient, "exit 0 even when a step fails");

    std::string tk_in, tk_out;
    auto* tk = app.add_subcommand("tokenize", "sequence JSON -> token file");
    tk->add_option("file", tk_in)->required();
    tk->add_option("-o,--out", tk_out);

    std::string dt_in, dt_out;
    auto* dt = app.add_subcommand("detokenize", "token file -> sequence JSON");
    dt->add_option("file", dt_in)->required();
    dt->add_option("-o,--out", dt_out);

    std::vector<std::string> va_files;
    auto* va = app.add_subcommand("validate", "validity columns for token or sequence files");
    va->add_option("files", va_files)->required();

    std::vector<std::string> me_files;
    auto* me = app.add_subcommand("metrics", "validity and prompt-satisfaction columns");
    me->add_option("files", me_files)->required();

    RewardArgs rw;
    auto* re = app.add_subcommand("rewards", "rewards and group advantages for sampled generations");
    re->add_option("records", rw.records, "JSON lines of sample records")->required();
    re->add_option("--estimator", rw.estimator)->check(CLI::IsMember({"grpo", "rloo", "remax"}));
    re->add_option("--presets", rw.presets, "hyperparameter preset file");

    std::size_t gc_n = 200, gc_copies = 0;
    std::uint64_t gc_seed = 0;
    std::string gc_out;
    auto* gc = app.add_subcommand("gen-corpus", "write synthetic profiles");
    gc->add_option("--n", gc_n);
    gc->add_option("--seed", gc_seed);
    gc->add_option("--congruent-copies", gc_copies, "extra rescaled copies of generated profiles");
    gc->add_option("-o,--out", gc_out)->required();

    std::string sv_in, sv_out;
    auto* sv = app.add_subcommand("svg", "render a profile or sequence");
    sv->add_option("file", sv_in)->required();
    sv->add_option("-o,--out", sv_out);

    std::string se_data, se_host = "127.0.0.1";
    int se_port = 8080;
    auto* se = app.add_subcommand("serve", "HTTP endpoints for the editor");
    se->add_option("--data", se_data, "directory of sequence JSON files (default $PROFILE_FORGE_DATA)");
    se->add_option("--host", se_host);
    se->add_option("--port", se_port);

    auto* vo = app.add_subcommand("vocab", "print the token vocabulary manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ex) return cmd_extract(ea);
        if (*rp) return cmd_replay(ra);
        if (*tk) return cmd_tokenize(tk_in, tk_out);
        if (*dt) return cmd_detokenize(dt_in, dt_out);
        if (*va) return cmd_validate(va_files);
        if (*me) return cmd_metrics(me_files);
        if (*re) return cmd_rewards(rw);
        if (*gc) return cmd_gen_corpus(gc_n, gc_copies, gc_seed, gc_out);
        if (*sv) return cmd_svg(sv_in, sv_out);
        if (*se) return cmd_serve(se_data, se_host, se_port);
        if (*vo) {
            std::cout << vocabulary_manifest();
            return kExitOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidReference& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const GroupTooSmall& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGeometry;
    }
    return kExitUsage;
}
