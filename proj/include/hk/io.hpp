#pragma once

// JSON forms of structures and verdicts.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hk/decide.hpp"
#include "hk/error.hpp"
#include "hk/structure.hpp"

namespace hk {

/// {"nodes": [...], "edges": [[u, v], ...], "tuple": [...]} with nodes and
/// edges sorted, so equal structures serialize to equal bytes.
inline nlohmann::ordered_json structure_to_json(const Structure& s)
{
    std::vector<std::string> nodes = s.names();
    std::sort(nodes.begin(), nodes.end());
    auto edges = named_edges(s);
    std::sort(edges.begin(), edges.end());
    nlohmann::ordered_json j;
    j["nodes"] = nodes;
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& [u, v] : edges) j["edges"].push_back({u, v});
    j["tuple"] = nlohmann::ordered_json::array();
    for (NodeIndex t : s.tuple()) j["tuple"].push_back(s.name(t));
    return j;
}

inline Structure structure_from_json(const nlohmann::json& j)
{
    auto strings = [&](const char* field) {
        std::vector<std::string> out;
        if (!j.contains(field)) return out;
        const auto& a = j.at(field);
        if (!a.is_array()) throw MalformedStructure(std::string("'") + field + "' must be an array");
        for (const auto& e : a) {
            if (!e.is_string()) throw MalformedStructure(std::string("'") + field + "' entries must be strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    };
    if (!j.is_object()) throw MalformedStructure("structure must be a JSON object");
    std::vector<std::pair<std::string, std::string>> edges;
    if (j.contains("edges")) {
        if (!j.at("edges").is_array()) throw MalformedStructure("'edges' must be an array");
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
                throw MalformedStructure("each edge must be a pair of node names");
            edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
    }
    return Structure::from_names(strings("nodes"), edges, strings("tuple"));
}

inline Structure parse_structure(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedStructure(std::string("invalid JSON: ") + e.what());
    }
    return structure_from_json(j);
}

/// Elapsed time is reported as 0 unless `with_time`, keeping output
/// byte-stable across identical runs.
inline nlohmann::ordered_json verdict_to_json(const Verdict& v, bool with_time)
{
    nlohmann::ordered_json j;
    j["value"] = v.value;
    j["algorithm"] = std::string(algorithm_name(v.algorithm));
    j["m"] = v.m.str();
    j["structures"] = v.structures;
    j["cache_hits"] = v.cache_hits;
    j["elapsed_ms"] = with_time ? static_cast<std::int64_t>(v.elapsed.count()) : 0;
    j["sound"] = v.sound;
    return j;
}

inline std::string verdict_to_text(const Verdict& v, bool with_time)
{
    std::string out;
    out += "value=" + std::string(v.value ? "true" : "false") + "\n";
    out += "algorithm=" + std::string(algorithm_name(v.algorithm)) + "\n";
    out += "m=" + v.m.str() + "\n";
    out += "structures=" + std::to_string(v.structures) + "\n";
    out += "cache_hits=" + std::to_string(v.cache_hits) + "\n";
    out += "elapsed_ms=" + std::to_string(with_time ? v.elapsed.count() : 0) + "\n";
    out += "sound=" + std::string(v.sound ? "true" : "false") + "\n";
    return out;
}

} // namespace hk
