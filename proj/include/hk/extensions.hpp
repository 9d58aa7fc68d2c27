#pragma once

// Compatibility of two structures sharing node ids, generation of all
// compatible extensions of a structure by new tuple entries, and
// enumeration of tcl^k_m(l)-structures up to isomorphism.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hk/bounds.hpp"
#include "hk/canonical.hpp"
#include "hk/structure.hpp"

namespace hk {

struct EnumerationCaps {
    std::uint64_t max_nodes = 64;
    std::uint64_t max_classes = 10'000'000;
    std::function<void()> poll; // called once per candidate; may throw to abort
};

/// Joint-embedding test. Nodes with equal names are the same node.
inline bool compatible(const Structure& s1, std::size_t k, Level m1, const Structure& s2, Level m2)
{
    Structure w;
    std::unordered_map<std::string, NodeIndex> index;
    auto intern = [&](const std::string& name) {
        auto [it, fresh] = index.emplace(name, 0);
        if (fresh) it->second = w.add_node(name);
        return it->second;
    };
    std::vector<NodeIndex> from1(s1.size()), from2(s2.size());
    for (NodeIndex v = 0; v < s1.size(); ++v) from1[v] = intern(s1.name(v));
    for (NodeIndex v = 0; v < s2.size(); ++v) from2[v] = intern(s2.name(v));
    for (NodeIndex u = 0; u < s1.size(); ++u)
        for (NodeIndex v : s1.children(u)) w.add_edge(from1[u], from1[v]);
    for (NodeIndex u = 0; u < s2.size(); ++u)
        for (NodeIndex v : s2.children(u)) w.add_edge(from2[u], from2[v]);
    std::vector<NodeIndex> a, b;
    for (NodeIndex t : s1.tuple()) a.push_back(from1[t]);
    for (NodeIndex t : s2.tuple()) b.push_back(from2[t]);
    std::vector<NodeIndex> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    w.set_tuple(ab);

    if (!detail::union_conditions(w, k, a, m1, b, m2)) return false;
    std::vector<std::size_t> pos_a(a.size()), pos_b(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) pos_a[i] = i;
    for (std::size_t i = 0; i < b.size(); ++i) pos_b[i] = a.size() + i;
    return literally_equal(restrict(w, m1, pos_a), s1) && literally_equal(restrict(w, m2, pos_b), s2);
}

namespace detail {

inline std::string fresh_name(std::size_t i) { return "_f" + std::to_string(i); }

/// Depth-first generator of the structures S' extending S by p tuple
/// entries with compatible(S @ m, S' @ m2). Nodes of S' are discovered in
/// breadth-first order from the extended tuple; each discovered node picks
/// its remaining children when it is dequeued, so every joint structure is
/// produced by exactly one sequence of choices up to fresh-node naming.
class ExtensionSearch {
public:
    ExtensionSearch(const Structure& s, std::size_t k, Level m, std::size_t p, Level m2, EnumerationCaps caps)
        : s_(s), k_(k), m_(m), p_(p), m2_(m2), caps_(caps), base_(s.size())
    {
        node_limit_ = node_bound(k, m2, s.arity() + p);
        if (node_limit_ > caps.max_nodes)
            throw CapExceeded("extension node bound " +
                              (node_limit_ == std::numeric_limits<std::uint64_t>::max() ? std::string("(overflow)")
                                                                                        : std::to_string(node_limit_)) +
                              " exceeds max-nodes " + std::to_string(caps.max_nodes));
        for (const auto& name : s.names())
            if (name.rfind("_f", 0) == 0)
                throw PreconditionError("node id '" + name + "' uses the reserved prefix _f");
        dist_s_ = distances(s, s.tuple());
        can_grow_.assign(base_, 0);
        for (NodeIndex v = 0; v < base_; ++v) {
            can_grow_[v] = dist_s_[v] != kUnreachable && dist_s_[v] >= m && s.out_degree(v) < k;
            if (!can_grow_[v]) ++final_sets_[s.children(v)];
        }
        children_.resize(base_);
        for (NodeIndex v = 0; v < base_; ++v) children_[v] = s.children(v);
    }

    /// Calls visit(S') per class; stops early when visit returns false.
    /// Returns false iff stopped early.
    template <class Visit>
    bool run(Visit&& visit)
    {
        return choose_tuple(0, visit);
    }

    std::size_t classes() const { return seen_.size(); }

private:
    NodeIndex new_fresh(Level depth)
    {
        children_.emplace_back();
        depth_.push_back(depth);
        return static_cast<NodeIndex>(children_.size() - 1);
    }

    void drop_fresh()
    {
        children_.pop_back();
        depth_.pop_back();
    }

    std::size_t total() const { return children_.size(); }

    template <class Visit>
    bool choose_tuple(std::size_t i, Visit& visit)
    {
        if (i == p_) {
            depth_.assign(total(), kUnreachable);
            queue_.clear();
            auto seed = [&](NodeIndex v) {
                if (depth_[v] == kUnreachable) {
                    depth_[v] = 0;
                    queue_.push_back(v);
                }
            };
            for (NodeIndex t : s_.tuple()) seed(t);
            for (NodeIndex t : extra_) seed(t);
            return process(0, visit);
        }
        const auto existing = static_cast<NodeIndex>(total());
        for (NodeIndex v = 0; v < existing; ++v) {
            extra_.push_back(v);
            const bool go = choose_tuple(i + 1, visit);
            extra_.pop_back();
            if (!go) return false;
        }
        children_.emplace_back();
        extra_.push_back(existing);
        const bool go = choose_tuple(i + 1, visit);
        extra_.pop_back();
        children_.pop_back();
        return go;
    }

    bool reaches(NodeIndex from, NodeIndex target) const
    {
        if (from == target) return true;
        std::vector<NodeIndex> stack{from};
        std::vector<char> seen(total(), 0);
        seen[from] = 1;
        while (!stack.empty()) {
            NodeIndex u = stack.back();
            stack.pop_back();
            for (NodeIndex c : children_[u]) {
                if (c == target) return true;
                if (!seen[c]) {
                    seen[c] = 1;
                    stack.push_back(c);
                }
            }
        }
        return false;
    }

    template <class Visit>
    bool process(std::size_t idx, Visit& visit)
    {
        if (queue_.size() > node_limit_) return true;
        if (idx == queue_.size()) return finish(visit);
        const NodeIndex v = queue_[idx];
        const Level d = depth_[v];
        const auto mark = queue_.size();
        if (v < base_ && d < m2_) {
            for (NodeIndex c : s_.children(v))
                if (depth_[c] == kUnreachable) {
                    depth_[c] = d + 1;
                    queue_.push_back(c);
                }
        }
        bool go = true;
        if (v < base_ && !can_grow_[v]) {
            go = process(idx + 1, visit);
        } else {
            std::vector<NodeIndex> cands;
            if (v >= base_) {
                for (NodeIndex c = 0; c < base_; ++c)
                    if (d < m2_ || depth_[c] != kUnreachable) cands.push_back(c);
            }
            for (NodeIndex c = static_cast<NodeIndex>(base_); c < total(); ++c) cands.push_back(c);
            const std::size_t cap = k_ - children_[v].size();
            go = pick(v, d, idx, cands, 0, cap, visit);
        }
        while (queue_.size() > mark) {
            depth_[queue_.back()] = kUnreachable;
            queue_.pop_back();
        }
        return go;
    }

    template <class Visit>
    bool pick(NodeIndex v, Level d, std::size_t idx, const std::vector<NodeIndex>& cands, std::size_t pos,
              std::size_t cap, Visit& visit)
    {
        if (pos == cands.size() || cap == 0) return add_new(v, d, idx, cap, visit);
        if (!pick(v, d, idx, cands, pos + 1, cap, visit)) return false;
        const NodeIndex c = cands[pos];
        if (reaches(c, v)) return true;
        const bool discover = depth_[c] == kUnreachable;
        children_[v].insert(std::lower_bound(children_[v].begin(), children_[v].end(), c), c);
        if (discover) {
            depth_[c] = d + 1;
            queue_.push_back(c);
        }
        const bool go = pick(v, d, idx, cands, pos + 1, cap - 1, visit);
        if (discover) {
            depth_[c] = kUnreachable;
            queue_.pop_back();
        }
        children_[v].erase(std::lower_bound(children_[v].begin(), children_[v].end(), c));
        return go;
    }

    template <class Visit>
    bool add_new(NodeIndex v, Level d, std::size_t idx, std::size_t cap, Visit& visit)
    {
        const std::size_t max_new = d < m2_ ? cap : 0;
        for (std::size_t j = 0; j <= max_new; ++j) {
            for (std::size_t i = 0; i < j; ++i) {
                const NodeIndex f = new_fresh(d + 1);
                children_[v].push_back(f); // fresh ids exceed all others, order kept
                queue_.push_back(f);
            }
            const bool go = settle(v, d, idx, visit);
            for (std::size_t i = 0; i < j; ++i) {
                children_[v].pop_back();
                queue_.pop_back();
                drop_fresh();
            }
            if (!go) return false;
        }
        return true;
    }

    // v's child set is now final; check it against the other final sets of U.
    template <class Visit>
    bool settle(NodeIndex v, Level d, std::size_t idx, Visit& visit)
    {
        const bool in_u = d < m2_ || children_[v].size() == k_;
        if (!in_u) return process(idx + 1, visit);
        auto& count = final_sets_[children_[v]];
        if (count > 0) return true;
        ++count;
        const bool go = process(idx + 1, visit);
        --final_sets_[children_[v]];
        return go;
    }

    template <class Visit>
    bool finish(Visit& visit)
    {
        if (caps_.poll) caps_.poll();
        Structure w;
        for (NodeIndex v = 0; v < base_; ++v) w.add_node(s_.name(v));
        for (std::size_t i = base_; i < total(); ++i) w.add_node(fresh_name(i - base_));
        for (NodeIndex u = 0; u < total(); ++u)
            for (NodeIndex c : children_[u]) w.add_edge(u, c);
        std::vector<NodeIndex> tuple = s_.tuple();
        tuple.insert(tuple.end(), extra_.begin(), extra_.end());
        w.set_tuple(tuple);

        std::vector<std::size_t> new_positions(tuple.size());
        for (std::size_t i = 0; i < tuple.size(); ++i) new_positions[i] = i;
        Structure ext = restrict(w, m2_, new_positions);
        // every fresh node and every new edge must live in the extension
        if (ext.size() != queue_.size()) return true;
        for (NodeIndex u = static_cast<NodeIndex>(base_); u < total(); ++u)
            if (depth_[u] == kUnreachable) return true;
        if (!compatible(s_, k_, m_, ext, m2_) || !validate(ext, k_, m2_)) return true;

        std::vector<std::uint32_t> colors(ext.size());
        for (NodeIndex v = 0; v < ext.size(); ++v) {
            const auto orig = s_.find(ext.name(v));
            colors[v] = orig ? *orig + 1 : 0;
        }
        auto key = canonical_labeling(ext, colors).key;
        if (!seen_.insert(std::move(key)).second) return true;
        if (seen_.size() > caps_.max_classes)
            throw CapExceeded("extension classes exceed max-classes " + std::to_string(caps_.max_classes));
        return visit(ext);
    }

    const Structure& s_;
    std::size_t k_;
    Level m_;
    std::size_t p_;
    Level m2_;
    EnumerationCaps caps_;
    std::size_t base_;
    std::uint64_t node_limit_ = 0;
    std::vector<Level> dist_s_;
    std::vector<char> can_grow_;
    std::vector<std::vector<NodeIndex>> children_;
    std::vector<Level> depth_;
    std::vector<NodeIndex> queue_;
    std::vector<NodeIndex> extra_;
    std::map<std::vector<NodeIndex>, int> final_sets_;
    std::unordered_set<CanonicalKey, CanonicalKeyHash> seen_;
};

} // namespace detail

/// Visits one extension per class (isomorphism fixing S pointwise).
/// Returns false iff the visitor stopped the scan.
template <class Visit>
bool for_each_extension(const Structure& s, std::size_t k, Level m, std::size_t p, Level m2, Visit&& visit,
                        EnumerationCaps caps = {})
{
    detail::ExtensionSearch search(s, k, m, p, m2, caps);
    return search.run(visit);
}

inline std::vector<Structure> extensions(const Structure& s, std::size_t k, Level m, std::size_t p, Level m2,
                                         EnumerationCaps caps = {})
{
    std::vector<Structure> out;
    for_each_extension(
        s, k, m, p, m2,
        [&](const Structure& e) {
            out.push_back(e);
            return true;
        },
        caps);
    return out;
}

/// One canonical representative per class of tcl^k_m(l)-structures,
/// ordered by canonical key.
inline std::vector<Canonical> enumerate(std::size_t k, Level m, std::size_t l, EnumerationCaps caps = {})
{
    std::vector<Canonical> out;
    for_each_extension(
        Structure{}, k, 0, l, m,
        [&](const Structure& e) {
            out.push_back(canonicalize(e));
            return true;
        },
        caps);
    std::sort(out.begin(), out.end(), [](const Canonical& a, const Canonical& b) { return a.key < b.key; });
    return out;
}

} // namespace hk
