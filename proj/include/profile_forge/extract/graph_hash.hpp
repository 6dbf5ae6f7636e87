#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "../profile.hpp"
#include "normalize.hpp"

namespace pforge {

namespace detail {

inline std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline int coarse_bin(double v)
{
    const int b = static_cast<int>(std::floor((v + 0.5) * 8.0 + 1e-7));
    return std::clamp(b, 0, 7);
}

inline std::string coarse_label(Point2 p)
{
    return std::to_string(coarse_bin(p.x)) + "," + std::to_string(coarse_bin(p.y));
}

}  // namespace detail

// Weisfeiler-Lehman hash of the vertex/curve graph of a normalized profile.
// Vertices (and circle loops) are nodes labelled by their 8x8 cell; curves are
// edges labelled by type.
inline std::string wl_graph_hash(const Profile& p, int iterations = 3)
{
    std::map<std::pair<long long, long long>, int> ids;
    std::vector<std::string> labels;
    std::vector<std::vector<std::pair<int, char>>> adj;
    auto vertex = [&](Point2 q) {
        const std::pair<long long, long long> k{std::llround(q.x * 1e7), std::llround(q.y * 1e7)};
        auto [it, fresh] = ids.emplace(k, static_cast<int>(labels.size()));
        if (fresh) {
            labels.push_back("v" + detail::coarse_label(q));
            adj.emplace_back();
        }
        return it->second;
    };
    for (const auto& loop : p.loops) {
        if (loop.is_circle()) {
            labels.push_back("c" + detail::coarse_label(loop.circle->center));
            adj.emplace_back();
            continue;
        }
        for (const auto& c : loop.curves) {
            const int a = vertex(curve_start(c)), b = vertex(curve_end(c));
            const char t = is_line(c) ? 'l' : 'a';
            adj[static_cast<std::size_t>(a)].push_back({b, t});
            adj[static_cast<std::size_t>(b)].push_back({a, t});
        }
    }

    std::vector<std::string> counts;
    auto histogram = [&](const std::vector<std::string>& ls) {
        std::vector<std::string> s = ls;
        std::sort(s.begin(), s.end());
        std::string joined;
        for (const auto& x : s) joined += x + ";";
        counts.push_back(joined);
    };
    histogram(labels);
    for (int it = 0; it < iterations; ++it) {
        std::vector<std::string> next(labels.size());
        for (std::size_t v = 0; v < labels.size(); ++v) {
            std::vector<std::string> nb;
            for (auto [u, t] : adj[v]) nb.push_back(std::string(1, t) + labels[static_cast<std::size_t>(u)]);
            std::sort(nb.begin(), nb.end());
            std::string s = labels[v] + "|";
            for (const auto& x : nb) s += x + ",";
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(s)));
            next[v] = buf;
        }
        labels = std::move(next);
        histogram(labels);
    }
    std::string all;
    for (const auto& c : counts) all += c + "#";
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(all)));
    return buf;
}

// Hash used for deduplication; invariant under translation and uniform scale.
inline std::string profile_graph_hash(const Profile& raw) { return wl_graph_hash(normalize_profile(raw).profile); }

// Indices of the first profile seen for each distinct hash.
inline std::vector<std::size_t> dedup_by_hash(const std::vector<Profile>& ps)
{
    std::map<std::string, std::size_t> seen;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (seen.emplace(profile_graph_hash(ps[i]), i).second) keep.push_back(i);
    return keep;
}

}  // namespace pforge
