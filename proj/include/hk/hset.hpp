#pragma once

// Hereditarily finite sets as interned values: every distinct set exists
// once, so equality is pointer equality. Children are kept in order of
// their rendering, shorter first.

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hk/canonical.hpp"
#include "hk/error.hpp"
#include "hk/formula.hpp"
#include "hk/structure.hpp"

namespace hk {

class HSet {
public:
    /// The empty set.
    HSet() : node_(empty_node()) {}

    /// The set whose elements are `elems` (duplicates collapse).
    static HSet of(std::vector<HSet> elems)
    {
        std::sort(elems.begin(), elems.end());
        elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
        return HSet(intern(std::move(elems)));
    }

    static HSet singleton(HSet x) { return of({x}); }

    /// {}^h: h nested singletons around the empty set.
    static HSet tower(std::size_t h)
    {
        HSet s;
        for (std::size_t i = 0; i < h; ++i) s = singleton(s);
        return s;
    }

    const std::vector<HSet>& elements() const { return node_->elems; }
    std::size_t size() const { return node_->elems.size(); }
    bool empty() const { return node_->elems.empty(); }
    const std::string& render() const { return node_->text; }

    bool contains(HSet x) const
    {
        return std::binary_search(node_->elems.begin(), node_->elems.end(), x);
    }

    friend bool operator==(HSet a, HSet b) { return a.node_ == b.node_; }
    friend bool operator<(HSet a, HSet b)
    {
        if (a.node_ == b.node_) return false;
        const std::string& x = a.node_->text;
        const std::string& y = b.node_->text;
        return x.size() != y.size() ? x.size() < y.size() : x < y;
    }

    std::size_t hash() const noexcept { return std::hash<const void*>{}(node_); }

private:
    struct Node {
        std::vector<HSet> elems;
        std::string text;
    };

    explicit HSet(const Node* n) : node_(n) {}

    static const Node* empty_node()
    {
        static const Node* const node = intern({});
        return node;
    }

    static const Node* intern(std::vector<HSet> elems)
    {
        std::string text = "{";
        for (std::size_t i = 0; i < elems.size(); ++i) {
            if (i) text += ',';
            text += elems[i].render();
        }
        text += '}';
        static std::mutex mutex;
        static std::unordered_map<std::string, std::unique_ptr<Node>> table;
        std::lock_guard lock(mutex);
        auto it = table.find(text);
        if (it != table.end()) return it->second.get();
        auto node = std::make_unique<Node>(Node{std::move(elems), text});
        const Node* raw = node.get();
        table.emplace(std::move(text), std::move(node));
        return raw;
    }

    const Node* node_;
};

struct HSetHash {
    std::size_t operator()(HSet s) const noexcept { return s.hash(); }
};

inline const std::string& render_set(HSet s) { return s.render(); }

namespace detail {

class SetParser {
public:
    explicit SetParser(std::string_view text) : text_(text) {}

    HSet parse_all()
    {
        HSet s = parse_one();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return s;
    }

    HSet parse_one()
    {
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != '{') fail("expected '{'");
        ++pos_;
        std::vector<HSet> elems;
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == '}') {
            ++pos_;
            return HSet::of({});
        }
        for (;;) {
            elems.push_back(parse_one());
            skip_space();
            if (pos_ >= text_.size()) fail("unterminated set");
            if (text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (text_[pos_] == '}') {
                ++pos_;
                return HSet::of(std::move(elems));
            }
            fail("expected ',' or '}'");
        }
    }

    std::size_t position() const { return pos_; }

private:
    void skip_space()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r'))
            ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(what, line, col);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline HSet parse_set(std::string_view text) { return detail::SetParser(text).parse_all(); }

/// Parses "x={{}};y={}" into a variable assignment.
inline std::map<std::string, HSet> parse_assignment(std::string_view text)
{
    std::map<std::string, HSet> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(';', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view item = text.substr(start, end - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) {
            auto eq = item.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected name=set", 1, start + 1);
            std::string name(item.substr(0, eq));
            while (!name.empty() && name.back() == ' ') name.pop_back();
            if (name.empty()) throw ParseError("missing variable name", 1, start + 1);
            out[name] = parse_set(item.substr(eq + 1));
        }
        start = end + 1;
    }
    return out;
}

/// Every set in the hereditary closure has at most k elements.
inline bool check_k(HSet s, std::size_t k)
{
    std::unordered_set<HSet, HSetHash> seen;
    std::vector<HSet> stack{s};
    while (!stack.empty()) {
        HSet x = stack.back();
        stack.pop_back();
        if (!seen.insert(x).second) continue;
        if (x.size() > k) return false;
        for (HSet e : x.elements()) stack.push_back(e);
    }
    return true;
}

/// stcl_n of the tuple: sets within n membership steps, nodes named by
/// their rendering, listed in discovery order.
inline Structure tcl_structure(const std::vector<HSet>& tuple, Level n)
{
    std::vector<HSet> nodes;
    std::unordered_map<HSet, NodeIndex, HSetHash> index;
    std::vector<Level> depth;
    auto add = [&](HSet x, Level d) {
        auto [it, fresh] = index.emplace(x, static_cast<NodeIndex>(nodes.size()));
        if (fresh) {
            nodes.push_back(x);
            depth.push_back(d);
        }
        return it->second;
    };
    std::vector<NodeIndex> t;
    for (HSet a : tuple) t.push_back(add(a, 0));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (depth[i] >= n) continue;
        for (HSet e : nodes[i].elements()) add(e, depth[i] + 1);
    }
    Structure s;
    for (HSet x : nodes) s.add_node(x.render());
    for (NodeIndex u = 0; u < nodes.size(); ++u)
        for (HSet e : nodes[u].elements()) {
            auto it = index.find(e);
            if (it != index.end()) s.add_edge(u, it->second);
        }
    s.set_tuple(std::move(t));
    return s;
}

inline bool sim_n(const std::vector<HSet>& a, const std::vector<HSet>& b, Level n)
{
    if (a.size() != b.size()) throw PreconditionError("sim_n: tuple lengths differ");
    return isomorphic(tcl_structure(a, n), tcl_structure(b, n));
}

namespace detail {

inline bool eval_bounded_rec(const Formula& f, std::vector<std::pair<std::string, HSet>>& env)
{
    auto lookup = [&](const std::string& name) {
        for (auto it = env.rbegin(); it != env.rend(); ++it)
            if (it->first == name) return it->second;
        throw PreconditionError("unassigned variable '" + name + "'");
    };
    switch (f.kind()) {
    case FormulaKind::Member: return lookup(f.other()).contains(lookup(f.var()));
    case FormulaKind::Equal: return lookup(f.var()) == lookup(f.other());
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Not: return !eval_bounded_rec(f.body(), env);
    case FormulaKind::And: return eval_bounded_rec(f.lhs(), env) && eval_bounded_rec(f.rhs(), env);
    case FormulaKind::Or: return eval_bounded_rec(f.lhs(), env) || eval_bounded_rec(f.rhs(), env);
    case FormulaKind::Implies: return !eval_bounded_rec(f.lhs(), env) || eval_bounded_rec(f.rhs(), env);
    case FormulaKind::Iff: return eval_bounded_rec(f.lhs(), env) == eval_bounded_rec(f.rhs(), env);
    case FormulaKind::BoundedExists:
    case FormulaKind::BoundedForall: {
        const bool want = f.kind() == FormulaKind::BoundedExists;
        const HSet range = lookup(f.other());
        for (HSet e : range.elements()) {
            env.emplace_back(f.var(), e);
            const bool v = eval_bounded_rec(f.body(), env);
            env.pop_back();
            if (v == want) return want;
        }
        return !want;
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall: throw PreconditionError("eval_bounded: unbounded quantifier on '" + f.var() + "'");
    }
    return false;
}

} // namespace detail

/// Truth of a bounded formula under a concrete assignment.
inline bool eval_bounded(const Formula& f, const std::map<std::string, HSet>& assignment)
{
    std::vector<std::pair<std::string, HSet>> env(assignment.begin(), assignment.end());
    return detail::eval_bounded_rec(f, env);
}

/// Concrete sets whose level-m closure is isomorphic to s. Opaque nodes
/// (outside U) that would collide with another node receive one extra
/// element: a singleton tower tall enough to differ from every node value
/// and from every other padding.
inline std::vector<HSet> realize(const Structure& s, std::size_t k, Level m)
{
    if (!validate(s, k, m)) throw PreconditionError("realize: not a valid structure at the given k, m");
    const std::size_t n = s.size();
    const auto dist = distances(s, s.tuple());
    std::vector<char> in_u(n);
    for (NodeIndex v = 0; v < n; ++v) in_u[v] = dist[v] < m || s.out_degree(v) == k;

    // group by child set; decide who needs padding
    std::map<std::vector<NodeIndex>, std::vector<NodeIndex>> groups;
    for (NodeIndex v = 0; v < n; ++v) groups[s.children(v)].push_back(v);
    std::vector<char> padded(n, 0);
    for (const auto& [kids, members] : groups) {
        const bool has_u = std::any_of(members.begin(), members.end(), [&](NodeIndex v) { return in_u[v]; });
        bool first_opaque = true;
        for (NodeIndex v : members) {
            if (in_u[v]) continue;
            if (!has_u && first_opaque) {
                first_opaque = false;
                continue;
            }
            if (k == 0) throw PreconditionError("realize: opaque node needs padding but k = 0");
            padded[v] = 1;
        }
    }

    // children before parents
    std::vector<NodeIndex> indeg(n, 0), order;
    for (NodeIndex u = 0; u < n; ++u)
        for (NodeIndex c : s.children(u)) ++indeg[c];
    std::vector<NodeIndex> ready;
    for (NodeIndex v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        NodeIndex u = ready.back();
        ready.pop_back();
        order.push_back(u);
        for (NodeIndex c : s.children(u))
            if (--indeg[c] == 0) ready.push_back(c);
    }
    std::vector<HSet> value(n);
    std::size_t pad_index = 0;
    std::vector<NodeIndex> pad_slot(n, 0);
    for (NodeIndex v = 0; v < n; ++v)
        if (padded[v]) pad_slot[v] = static_cast<NodeIndex>(pad_index++);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const NodeIndex v = *it;
        std::vector<HSet> elems;
        for (NodeIndex c : s.children(v)) elems.push_back(value[c]);
        if (padded[v]) elems.push_back(HSet::tower((n + 2) * (pad_slot[v] + 1)));
        value[v] = HSet::of(std::move(elems));
    }
    std::vector<HSet> out;
    for (NodeIndex t : s.tuple()) out.push_back(value[t]);
    return out;
}

} // namespace hk

template <>
struct std::hash<hk::HSet> {
    std::size_t operator()(hk::HSet s) const noexcept { return s.hash(); }
};
