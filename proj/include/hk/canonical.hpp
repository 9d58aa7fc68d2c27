#pragma once

// Canonical labeling of pointed DAGs by partition refinement with
// individualization, plus plain backtracking isomorphism and embedding
// tests that share no code with the labeling.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hk/structure.hpp"

namespace hk {

/// Byte encoding of an isomorphism class (tuple positions fixed).
class CanonicalKey {
public:
    CanonicalKey() = default;
    explicit CanonicalKey(std::string bytes) : bytes_(std::move(bytes)) {}

    const std::string& bytes() const { return bytes_; }

    std::string hex() const
    {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(bytes_.size() * 2);
        for (unsigned char c : bytes_) {
            out.push_back(digits[c >> 4]);
            out.push_back(digits[c & 15]);
        }
        return out;
    }

    friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
    friend bool operator==(const CanonicalKey&, const CanonicalKey&) = default;

private:
    std::string bytes_;
};

struct CanonicalKeyHash {
    std::size_t operator()(const CanonicalKey& k) const noexcept { return std::hash<std::string>{}(k.bytes()); }
};

struct CanonicalLabeling {
    CanonicalKey key;
    std::vector<NodeIndex> position; // original node -> canonical position
};

namespace detail {

using Coloring = std::vector<std::uint32_t>;

inline void put16(std::string& out, std::size_t v)
{
    if (v > 0xFFFF) throw CapExceeded("structure too large to encode");
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>(v & 0xFF));
}

/// Replaces signatures by their ranks; returns the number of distinct ranks.
template <class Sig>
std::uint32_t rank_signatures(const std::vector<Sig>& sigs, Coloring& colors)
{
    std::vector<NodeIndex> order(sigs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) { return sigs[a] < sigs[b]; });
    std::uint32_t rank = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0 && sigs[order[i - 1]] < sigs[order[i]]) ++rank;
        colors[order[i]] = rank;
    }
    return order.empty() ? 0 : rank + 1;
}

class Labeler {
public:
    Labeler(const Structure& s, std::span<const std::uint32_t> initial)
        : s_(s), n_(s.size()), parents_(s.size()), initial_(initial.begin(), initial.end())
    {
        if (!initial_.empty() && initial_.size() != n_)
            throw PreconditionError("canonicalize: color vector length differs from node count");
        if (initial_.empty()) initial_.assign(n_, 0);
        for (NodeIndex u = 0; u < n_; ++u)
            for (NodeIndex v : s.children(u)) parents_[v].push_back(u);
    }

    CanonicalLabeling run()
    {
        Coloring colors(n_);
        std::vector<std::vector<std::uint32_t>> seed(n_);
        for (NodeIndex v = 0; v < n_; ++v) {
            seed[v].push_back(initial_[v]);
            seed[v].push_back(static_cast<std::uint32_t>(s_.out_degree(v)));
            seed[v].push_back(static_cast<std::uint32_t>(parents_[v].size()));
        }
        for (std::size_t i = 0; i < s_.arity(); ++i) seed[s_.tuple()[i]].push_back(static_cast<std::uint32_t>(i + 1));
        rank_signatures(seed, colors);
        search(std::move(colors));
        CanonicalLabeling out;
        out.key = CanonicalKey(std::move(best_));
        out.position = std::move(best_position_);
        return out;
    }

private:
    std::uint32_t refine(Coloring& colors) const
    {
        std::uint32_t count = 0;
        for (auto c : colors) count = std::max(count, c + 1);
        std::vector<std::vector<std::uint32_t>> sigs(n_);
        for (;;) {
            for (NodeIndex v = 0; v < n_; ++v) {
                auto& sig = sigs[v];
                sig.clear();
                sig.push_back(colors[v]);
                const auto mark = sig.size();
                for (NodeIndex c : s_.children(v)) sig.push_back(colors[c]);
                std::sort(sig.begin() + static_cast<std::ptrdiff_t>(mark), sig.end());
                sig.push_back(0xFFFFFFFFu);
                const auto mark2 = sig.size();
                for (NodeIndex p : parents_[v]) sig.push_back(colors[p]);
                std::sort(sig.begin() + static_cast<std::ptrdiff_t>(mark2), sig.end());
            }
            const auto next = rank_signatures(sigs, colors);
            if (next == count) return count;
            count = next;
        }
    }

    bool twins(NodeIndex a, NodeIndex b) const
    {
        return s_.children(a) == s_.children(b) && parents_[a] == parents_[b];
    }

    void search(Coloring colors)
    {
        if (++leaves_ > kLeafCap) throw CapExceeded("canonical labeling search exceeded its budget");
        const auto count = refine(colors);
        if (count == n_) {
            leaf(colors);
            return;
        }
        // first non-singleton cell
        std::vector<std::uint32_t> size(count, 0);
        for (auto c : colors) ++size[c];
        std::uint32_t cell = 0;
        while (size[cell] < 2) ++cell;
        std::vector<NodeIndex> members;
        for (NodeIndex v = 0; v < n_; ++v)
            if (colors[v] == cell) members.push_back(v);
        bool all_twins = true;
        for (std::size_t i = 1; i < members.size() && all_twins; ++i) all_twins = twins(members[0], members[i]);
        for (NodeIndex chosen : members) {
            Coloring next(n_);
            for (NodeIndex v = 0; v < n_; ++v) next[v] = colors[v] * 2 + ((colors[v] == cell && v != chosen) ? 1 : 0);
            std::vector<std::uint32_t> sig(next);
            rank_signatures(sig, next);
            search(std::move(next));
            if (all_twins) break; // swapping twins is an automorphism
        }
    }

    void leaf(const Coloring& colors)
    {
        std::string enc;
        enc.reserve(4 + 2 * (s_.arity() + 2 * n_ + s_.edge_count()));
        put16(enc, n_);
        put16(enc, s_.arity());
        for (NodeIndex t : s_.tuple()) put16(enc, colors[t]);
        std::vector<NodeIndex> at(n_);
        for (NodeIndex v = 0; v < n_; ++v) at[colors[v]] = v;
        for (std::size_t p = 0; p < n_; ++p) put16(enc, initial_[at[p]]);
        std::vector<std::uint32_t> kids;
        for (std::size_t p = 0; p < n_; ++p) {
            const NodeIndex v = at[p];
            kids.clear();
            for (NodeIndex c : s_.children(v)) kids.push_back(colors[c]);
            std::sort(kids.begin(), kids.end());
            put16(enc, kids.size());
            for (auto c : kids) put16(enc, c);
        }
        if (!have_best_ || enc < best_) {
            best_ = std::move(enc);
            best_position_.assign(colors.begin(), colors.end());
            have_best_ = true;
        }
    }

    static constexpr std::size_t kLeafCap = std::size_t{1} << 22;

    const Structure& s_;
    std::size_t n_;
    std::vector<std::vector<NodeIndex>> parents_;
    std::vector<std::uint32_t> initial_;
    std::string best_;
    std::vector<NodeIndex> best_position_;
    bool have_best_ = false;
    std::size_t leaves_ = 0;
};

inline std::string position_name(std::size_t p, std::size_t n)
{
    std::size_t width = 1;
    for (std::size_t x = n > 0 ? n - 1 : 0; x >= 10; x /= 10) ++width;
    std::string digits = std::to_string(p);
    return "v" + std::string(width - digits.size(), '0') + digits;
}

} // namespace detail

/// Canonical labeling; optional per-node colors must be preserved by
/// isomorphisms (used to individualize a fixed substructure).
inline CanonicalLabeling canonical_labeling(const Structure& s, std::span<const std::uint32_t> colors = {})
{
    return detail::Labeler(s, colors).run();
}

/// Copy of s with node v moved to position[v] and renamed "v<position>".
inline Structure relabel(const Structure& s, const std::vector<NodeIndex>& position)
{
    const std::size_t n = s.size();
    std::vector<NodeIndex> at(n);
    for (NodeIndex v = 0; v < n; ++v) at[position[v]] = v;
    Structure out;
    for (std::size_t p = 0; p < n; ++p) out.add_node(detail::position_name(p, n));
    for (NodeIndex u = 0; u < n; ++u)
        for (NodeIndex v : s.children(u)) out.add_edge(position[u], position[v]);
    std::vector<NodeIndex> tuple;
    for (NodeIndex t : s.tuple()) tuple.push_back(position[t]);
    out.set_tuple(std::move(tuple));
    return out;
}

struct Canonical {
    Structure structure;
    CanonicalKey key;
};

inline Canonical canonicalize(const Structure& s)
{
    auto lab = canonical_labeling(s);
    return {relabel(s, lab.position), std::move(lab.key)};
}

inline CanonicalKey canonical_key(const Structure& s) { return canonical_labeling(s).key; }

namespace detail {

/// Backtracking search for an injective map x -> y sending tuple to tuple
/// position-wise, with edges preserved and reflected among mapped nodes.
/// With `onto` the map must be a bijection.
class MappingSearch {
public:
    MappingSearch(const Structure& x, const Structure& y, bool onto) : x_(x), y_(y), onto_(onto) {}

    bool run()
    {
        if (x_.arity() != y_.arity()) return false;
        if (x_.size() > y_.size()) return false;
        if (onto_ && (x_.size() != y_.size() || x_.edge_count() != y_.edge_count())) return false;
        fwd_.assign(x_.size(), kNone);
        bwd_.assign(y_.size(), kNone);
        xin_ = in_degrees(x_);
        yin_ = in_degrees(y_);
        for (std::size_t i = 0; i < x_.arity(); ++i) {
            const NodeIndex a = x_.tuple()[i], b = y_.tuple()[i];
            if (fwd_[a] == kNone && bwd_[b] == kNone) {
                if (!consistent(a, b)) return false;
                fwd_[a] = b;
                bwd_[b] = a;
            } else if (fwd_[a] != b || bwd_[b] != a) {
                return false;
            }
        }
        order_ = visit_order();
        return extend(0);
    }

private:
    static constexpr NodeIndex kNone = 0xFFFFFFFFu;

    std::vector<NodeIndex> visit_order() const
    {
        // unmapped nodes, neighbours of mapped nodes first
        std::vector<std::vector<NodeIndex>> adj(x_.size());
        for (NodeIndex u = 0; u < x_.size(); ++u)
            for (NodeIndex v : x_.children(u)) {
                adj[u].push_back(v);
                adj[v].push_back(u);
            }
        std::vector<char> seen(x_.size(), 0);
        std::vector<NodeIndex> queue, out;
        for (NodeIndex v = 0; v < x_.size(); ++v)
            if (fwd_[v] != kNone) {
                seen[v] = 1;
                queue.push_back(v);
            }
        auto drain = [&](std::size_t from) {
            for (std::size_t i = from; i < queue.size(); ++i)
                for (NodeIndex w : adj[queue[i]])
                    if (!seen[w]) {
                        seen[w] = 1;
                        queue.push_back(w);
                        out.push_back(w);
                    }
        };
        drain(0);
        for (NodeIndex v = 0; v < x_.size(); ++v)
            if (!seen[v]) {
                seen[v] = 1;
                const auto from = queue.size();
                queue.push_back(v);
                out.push_back(v);
                drain(from);
            }
        return out;
    }

    bool consistent(NodeIndex a, NodeIndex b) const
    {
        if (onto_ && (x_.out_degree(a) != y_.out_degree(b) || xin_[a] != yin_[b])) return false;
        if (x_.has_edge(a, a) != y_.has_edge(b, b)) return false;
        for (NodeIndex c = 0; c < x_.size(); ++c) {
            if (fwd_[c] == kNone) continue;
            if (x_.has_edge(a, c) != y_.has_edge(b, fwd_[c])) return false;
            if (x_.has_edge(c, a) != y_.has_edge(fwd_[c], b)) return false;
        }
        return true;
    }

    bool extend(std::size_t i)
    {
        if (i == order_.size()) return true;
        const NodeIndex a = order_[i];
        for (NodeIndex b = 0; b < y_.size(); ++b) {
            if (bwd_[b] != kNone || !consistent(a, b)) continue;
            fwd_[a] = b;
            bwd_[b] = a;
            if (extend(i + 1)) return true;
            fwd_[a] = kNone;
            bwd_[b] = kNone;
        }
        return false;
    }

    const Structure& x_;
    const Structure& y_;
    bool onto_;
    std::vector<NodeIndex> fwd_, bwd_, xin_, yin_, order_;
};

} // namespace detail

inline bool isomorphic(const Structure& x, const Structure& y)
{
    return detail::MappingSearch(x, y, true).run();
}

inline bool embeds(const Structure& x, const Structure& y)
{
    if (x.arity() != y.arity()) throw PreconditionError("embeds: tuple lengths differ");
    return detail::MappingSearch(x, y, false).run();
}

} // namespace hk
