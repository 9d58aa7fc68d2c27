#pragma once

// Finite pointed DAGs <T, in, a>: an edge u -> v means v is a member of u.
// A structure is a tcl^k_m(l)-structure when it is acyclic with out-degree
// <= k, every node lies within m steps of the tuple, and the nodes whose
// extension is fully determined (within < m steps, or already holding k
// members) have pairwise distinct child sets.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hk/error.hpp"

namespace hk {

using NodeIndex = std::uint32_t;
using Level = std::uint64_t;

inline constexpr Level kUnreachable = std::numeric_limits<Level>::max();

class Structure {
public:
    Structure() = default;

    /// Builds from node names, edges [u, v] meaning v in u, and tuple names.
    static Structure from_names(const std::vector<std::string>& nodes,
                                const std::vector<std::pair<std::string, std::string>>& edges,
                                const std::vector<std::string>& tuple)
    {
        Structure s;
        std::unordered_map<std::string, NodeIndex> index;
        for (const auto& n : nodes) {
            if (!index.emplace(n, static_cast<NodeIndex>(s.names_.size())).second)
                throw MalformedStructure("duplicate node '" + n + "'");
            s.add_node(n);
        }
        auto lookup = [&](const std::string& n, const char* what) {
            auto it = index.find(n);
            if (it == index.end()) throw MalformedStructure(std::string(what) + " refers to unknown node '" + n + "'");
            return it->second;
        };
        for (const auto& [u, v] : edges) s.add_edge(lookup(u, "edge"), lookup(v, "edge"));
        for (const auto& t : tuple) s.tuple_.push_back(lookup(t, "tuple"));
        return s;
    }

    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }

    const std::string& name(NodeIndex v) const { return names_[v]; }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<NodeIndex> find(std::string_view n) const
    {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == n) return static_cast<NodeIndex>(i);
        return std::nullopt;
    }

    /// Members of v, ascending by index.
    const std::vector<NodeIndex>& children(NodeIndex v) const { return children_[v]; }
    std::size_t out_degree(NodeIndex v) const { return children_[v].size(); }

    bool has_edge(NodeIndex u, NodeIndex v) const
    {
        return std::binary_search(children_[u].begin(), children_[u].end(), v);
    }

    std::size_t edge_count() const
    {
        std::size_t n = 0;
        for (const auto& c : children_) n += c.size();
        return n;
    }

    const std::vector<NodeIndex>& tuple() const { return tuple_; }
    std::size_t arity() const { return tuple_.size(); }

    NodeIndex add_node(std::string n)
    {
        names_.push_back(std::move(n));
        children_.emplace_back();
        return static_cast<NodeIndex>(names_.size() - 1);
    }

    void add_edge(NodeIndex u, NodeIndex v)
    {
        if (u >= size() || v >= size()) throw MalformedStructure("edge endpoint out of range");
        auto& c = children_[u];
        auto it = std::lower_bound(c.begin(), c.end(), v);
        if (it == c.end() || *it != v) c.insert(it, v);
    }

    void set_tuple(std::vector<NodeIndex> t)
    {
        for (NodeIndex v : t)
            if (v >= size()) throw MalformedStructure("tuple entry out of range");
        tuple_ = std::move(t);
    }

    void push_tuple(NodeIndex v)
    {
        if (v >= size()) throw MalformedStructure("tuple entry out of range");
        tuple_.push_back(v);
    }

    /// Same nodes, edges and tuple, node order included.
    friend bool operator==(const Structure&, const Structure&) = default;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<NodeIndex>> children_;
    std::vector<NodeIndex> tuple_;
};

// ---------------------------------------------------------------------------
// Graph helpers

/// Shortest distance from any source along edges; kUnreachable otherwise.
inline std::vector<Level> distances(const Structure& s, std::span<const NodeIndex> sources, Level limit = kUnreachable)
{
    std::vector<Level> dist(s.size(), kUnreachable);
    std::deque<NodeIndex> queue;
    for (NodeIndex v : sources) {
        if (dist[v] != 0) {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        NodeIndex u = queue.front();
        queue.pop_front();
        if (dist[u] >= limit) continue;
        for (NodeIndex v : s.children(u)) {
            if (dist[v] == kUnreachable) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

inline std::vector<NodeIndex> in_degrees(const Structure& s)
{
    std::vector<NodeIndex> deg(s.size(), 0);
    for (NodeIndex u = 0; u < s.size(); ++u)
        for (NodeIndex v : s.children(u)) ++deg[v];
    return deg;
}

/// Kahn's algorithm; self-loops count as cycles.
inline bool is_acyclic(const Structure& s)
{
    auto indeg = in_degrees(s);
    std::vector<NodeIndex> stack;
    for (NodeIndex v = 0; v < s.size(); ++v)
        if (indeg[v] == 0) stack.push_back(v);
    std::size_t seen = 0;
    while (!stack.empty()) {
        NodeIndex u = stack.back();
        stack.pop_back();
        ++seen;
        for (NodeIndex v : s.children(u))
            if (--indeg[v] == 0) stack.push_back(v);
    }
    return seen == s.size();
}

namespace detail {

/// Joint-embedding conditions for a structure with two distinguished tuples
/// at levels m_a and m_b. With an empty second tuple this is plain validity.
inline bool union_conditions(const Structure& w, std::size_t k, std::span<const NodeIndex> a, Level m_a,
                             std::span<const NodeIndex> b, Level m_b)
{
    for (NodeIndex v = 0; v < w.size(); ++v)
        if (w.out_degree(v) > k) return false;
    if (!is_acyclic(w)) return false;
    const auto da = distances(w, a);
    const auto db = distances(w, b);
    std::set<std::vector<NodeIndex>> extensions;
    for (NodeIndex v = 0; v < w.size(); ++v) {
        const bool reach_a = da[v] != kUnreachable && da[v] <= m_a;
        const bool reach_b = db[v] != kUnreachable && db[v] <= m_b;
        if (!reach_a && !reach_b) return false;
    }
    for (NodeIndex v = 0; v < w.size(); ++v) {
        const bool determined = (da[v] != kUnreachable && da[v] < m_a) || (db[v] != kUnreachable && db[v] < m_b) ||
                                w.out_degree(v) == k;
        if (determined && !extensions.insert(w.children(v)).second) return false;
    }
    return true;
}

} // namespace detail

/// Whether s is a tcl^k_m(l)-structure, l = s.arity().
inline bool validate(const Structure& s, std::size_t k, Level m)
{
    return detail::union_conditions(s, k, s.tuple(), m, {}, 0);
}

/// Induced substructure on the nodes within m_sub steps of the selected
/// tuple positions, keeping node names and relative order.
inline Structure restrict(const Structure& s, Level m_sub, std::span<const std::size_t> positions)
{
    std::vector<NodeIndex> sources;
    sources.reserve(positions.size());
    for (std::size_t p : positions) {
        if (p >= s.arity()) throw PreconditionError("restrict: tuple position out of range");
        sources.push_back(s.tuple()[p]);
    }
    const auto dist = distances(s, sources, m_sub);
    std::vector<NodeIndex> remap(s.size(), std::numeric_limits<NodeIndex>::max());
    Structure out;
    for (NodeIndex v = 0; v < s.size(); ++v)
        if (dist[v] <= m_sub) remap[v] = out.add_node(s.name(v));
    for (NodeIndex u = 0; u < s.size(); ++u) {
        if (remap[u] == std::numeric_limits<NodeIndex>::max()) continue;
        for (NodeIndex v : s.children(u))
            if (remap[v] != std::numeric_limits<NodeIndex>::max()) out.add_edge(remap[u], remap[v]);
    }
    std::vector<NodeIndex> tuple;
    for (NodeIndex v : sources) tuple.push_back(remap[v]);
    out.set_tuple(std::move(tuple));
    return out;
}

inline Structure restrict(const Structure& s, Level m_sub)
{
    std::vector<std::size_t> all(s.arity());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return restrict(s, m_sub, all);
}

/// Equality by node names: same node set, same edges, same tuple.
inline bool literally_equal(const Structure& x, const Structure& y)
{
    if (x.size() != y.size() || x.arity() != y.arity() || x.edge_count() != y.edge_count()) return false;
    std::unordered_map<std::string_view, NodeIndex> in_y;
    for (NodeIndex v = 0; v < y.size(); ++v) in_y.emplace(y.name(v), v);
    std::vector<NodeIndex> map(x.size());
    for (NodeIndex v = 0; v < x.size(); ++v) {
        auto it = in_y.find(x.name(v));
        if (it == in_y.end()) return false;
        map[v] = it->second;
    }
    for (NodeIndex u = 0; u < x.size(); ++u)
        for (NodeIndex v : x.children(u))
            if (!y.has_edge(map[u], map[v])) return false;
    for (std::size_t i = 0; i < x.arity(); ++i)
        if (map[x.tuple()[i]] != y.tuple()[i]) return false;
    return true;
}

inline std::vector<std::pair<std::string, std::string>> named_edges(const Structure& s)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (NodeIndex u = 0; u < s.size(); ++u)
        for (NodeIndex v : s.children(u)) out.emplace_back(s.name(u), s.name(v));
    return out;
}

} // namespace hk
