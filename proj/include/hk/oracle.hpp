#pragma once

// Deliberately naive reference implementations and test drivers.

#include <chrono>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hk/bounds.hpp"
#include "hk/canonical.hpp"
#include "hk/decide.hpp"
#include "hk/formula.hpp"
#include "hk/hset.hpp"
#include "hk/k0.hpp"
#include "hk/structure.hpp"

namespace hk {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

// ---------------------------------------------------------------------------
// Brute-force enumeration

/// Every graph on at most node_cap nodes with every tuple assignment,
/// filtered by validate and deduplicated by canonical key. Graphs are
/// generated with edges pointing from higher to lower labels (every DAG has
/// such a labeling, so no class is lost) and out-degree at most k (larger
/// out-degrees never validate).
inline std::vector<Canonical> brute_enumerate(std::size_t k, Level m, std::size_t l, std::size_t node_cap,
                                              std::uint64_t space_cap = 2'000'000'000)
{
    if (node_cap > 10) throw CapExceeded("brute-force node cap above 10");
    // size of the space: sum over n of (#graphs) * n^l
    {
        long double space = 0;
        for (std::size_t n = 0; n <= node_cap; ++n) {
            long double graphs = 1;
            for (std::size_t u = 0; u < n; ++u) {
                long double choices = 0, binom = 1;
                for (std::size_t j = 0; j <= std::min(k, u); ++j) {
                    choices += binom;
                    binom = binom * static_cast<long double>(u - j) / static_cast<long double>(j + 1);
                }
                graphs *= choices;
            }
            space += graphs * std::pow(static_cast<long double>(n), static_cast<long double>(l));
        }
        if (space > static_cast<long double>(space_cap))
            throw CapExceeded("brute-force space too large");
    }

    std::map<CanonicalKey, Structure> found;
    for (std::size_t n = 0; n <= node_cap; ++n) {
        // per-node list of admissible child sets (bitmasks over lower labels)
        std::vector<std::vector<std::uint32_t>> options(n);
        for (std::size_t u = 0; u < n; ++u)
            for (std::uint32_t mask = 0; mask < (1u << u); ++mask)
                if (static_cast<std::size_t>(__builtin_popcount(mask)) <= k) options[u].push_back(mask);
        std::vector<std::size_t> pick(n, 0);
        for (;;) {
            Structure g;
            for (std::size_t u = 0; u < n; ++u) g.add_node("n" + std::to_string(u));
            for (std::size_t u = 0; u < n; ++u)
                for (std::size_t v = 0; v < n; ++v)
                    if (options[u][pick[u]] >> v & 1u) g.add_edge(static_cast<NodeIndex>(u), static_cast<NodeIndex>(v));
            // validity depends on the tuple only through its set of entries
            std::vector<int> valid_for(std::size_t{1} << n, -1);
            std::vector<NodeIndex> tuple(l, 0);
            const bool any_tuple = n > 0 || l == 0;
            while (any_tuple) {
                std::uint32_t image = 0;
                for (NodeIndex t : tuple) image |= 1u << t;
                if (valid_for[image] < 0) {
                    Structure probe = g;
                    probe.set_tuple(tuple);
                    valid_for[image] = validate(probe, k, m) ? 1 : 0;
                }
                if (valid_for[image]) {
                    Structure s = g;
                    s.set_tuple(tuple);
                    auto lab = canonical_labeling(s);
                    if (!found.count(lab.key)) found.emplace(lab.key, relabel(s, lab.position));
                }
                std::size_t i = 0;
                while (i < l && ++tuple[i] == n) tuple[i++] = 0;
                if (i == l) break;
            }
            std::size_t u = 0;
            while (u < n && ++pick[u] == options[u].size()) pick[u++] = 0;
            if (u == n) break;
        }
    }
    std::vector<Canonical> out;
    for (auto& [key, s] : found) out.push_back({std::move(s), key});
    return out;
}

// ---------------------------------------------------------------------------
// Axioms

struct AxiomCase {
    std::string name;
    std::string text;
    bool feasible;
};

namespace detail {

inline std::string join(const std::vector<std::string>& parts, const std::string& sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline std::string indexed(const std::string& base, std::size_t n, std::size_t from = 0)
{
    std::vector<std::string> v;
    for (std::size_t i = from; i < n; ++i) v.push_back(base + std::to_string(i));
    return join(v, ", ");
}

} // namespace detail

/// "Every n sets have a set consisting of exactly them."
inline std::string pairing_axiom(std::size_t n)
{
    std::vector<std::string> eqs;
    for (std::size_t i = 0; i < n; ++i) eqs.push_back("t = x" + std::to_string(i));
    const std::string rhs = n == 0 ? "false" : "(" + detail::join(eqs, " | ") + ")";
    const std::string core = "exists y. forall t. (t in y <-> " + rhs + ")";
    if (n == 0) return core;
    return "forall " + detail::indexed("x", n) + ". " + core;
}

inline std::string extensionality_axiom()
{
    return "forall x, y. ((forall t. (t in x <-> t in y)) -> x = y)";
}

/// "Every set has at most k elements."
inline std::string size_axiom(std::size_t k)
{
    std::vector<std::string> in, eq;
    for (std::size_t i = 0; i <= k; ++i) in.push_back("u" + std::to_string(i) + " in x");
    for (std::size_t i = 0; i <= k; ++i)
        for (std::size_t j = i + 1; j <= k; ++j) eq.push_back("u" + std::to_string(i) + " = u" + std::to_string(j));
    const std::string lhs = in.size() == 1 ? in[0] : "(" + detail::join(in, " & ") + ")";
    const std::string rhs = eq.empty() ? "false" : eq.size() == 1 ? eq[0] : "(" + detail::join(eq, " | ") + ")";
    return "forall x, " + detail::indexed("u", k + 1) + ". (" + lhs + " -> " + rhs + ")";
}

/// "No membership cycle of length n."
inline std::string cycle_axiom(std::size_t n)
{
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < n; ++i) parts.push_back("x" + std::to_string(i) + " in x" + std::to_string(i + 1));
    parts.push_back("x" + std::to_string(n) + " = x0");
    return "forall " + detail::indexed("x", n + 1) + ". !(" + detail::join(parts, " & ") + ")";
}

inline std::string foundation_sentence()
{
    return "forall x. ((exists w. w in x) -> exists y. (y in x & forall z. !(z in x & z in y)))";
}

/// "There are at least n distinct sets."
inline std::string at_least_sentence(std::size_t n)
{
    std::vector<std::string> neq;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) neq.push_back("!(x" + std::to_string(i) + " = x" + std::to_string(j) + ")");
    const std::string body = neq.empty() ? "true" : "(" + detail::join(neq, " & ") + ")";
    if (n == 0) return body;
    return "exists " + detail::indexed("x", n) + ". " + body;
}

/// Axioms of S_k plus the foundation sentence, tagged by whether exact-bound
/// decision fits the default caps.
inline std::vector<AxiomCase> axiom_suite(std::size_t k)
{
    const bool small = k <= 1;
    std::vector<AxiomCase> out;
    out.push_back({"V_0", pairing_axiom(0), k <= 2});
    if (k != 0) out.push_back({"V_" + std::to_string(k), pairing_axiom(k), small});
    out.push_back({"E", extensionality_axiom(), small});
    out.push_back({"B_" + std::to_string(k), size_axiom(k), true});
    for (std::size_t n = 1; n <= 4; ++n) out.push_back({"C_" + std::to_string(n), cycle_axiom(n), k <= 2});
    out.push_back({"foundation", foundation_sentence(), small});
    return out;
}

// ---------------------------------------------------------------------------
// Random formulas

struct CorpusOptions {
    std::size_t count = 200;
    std::size_t max_rank = 2;
    std::size_t max_quantifiers = 3;
    std::size_t max_depth = 5;
    std::uint64_t seed = kDefaultSeed;
};

class FormulaGenerator {
public:
    explicit FormulaGenerator(std::uint64_t seed) : rng_(seed) {}

    /// Random formula whose free variables are among `scope`.
    Formula formula(const std::vector<std::string>& scope, std::size_t max_rank, std::size_t max_quantifiers,
                    std::size_t max_depth)
    {
        quantifiers_left_ = max_quantifiers;
        return gen(scope, max_rank, max_depth);
    }

    Formula sentence(std::size_t max_rank, std::size_t max_quantifiers, std::size_t max_depth)
    {
        return formula({}, max_rank, max_quantifiers, max_depth);
    }

    /// Like formula(), but every quantifier is bounded by a variable in scope.
    Formula bounded_formula(const std::vector<std::string>& scope, std::size_t max_rank,
                            std::size_t max_quantifiers, std::size_t max_depth)
    {
        bounded_ = true;
        Formula f = formula(scope, max_rank, max_quantifiers, max_depth);
        bounded_ = false;
        return f;
    }

    std::mt19937_64& rng() { return rng_; }

private:
    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    Formula leaf(const std::vector<std::string>& scope)
    {
        if (scope.empty() || below(12) == 0) return Formula::truth(below(2) == 0);
        const auto& a = scope[below(scope.size())];
        const auto& b = scope[below(scope.size())];
        return below(3) == 0 ? Formula::equal(a, b) : Formula::member(a, b);
    }

    Formula gen(const std::vector<std::string>& scope, std::size_t rank_left, std::size_t depth)
    {
        const bool can_quantify = rank_left > 0 && quantifiers_left_ > 0 && depth > 0 && !(bounded_ && scope.empty());
        if (depth == 0 || (!can_quantify && scope.empty())) return leaf(scope);
        std::size_t roll = below(20);
        if (scope.empty() && can_quantify) roll = 19;
        if (roll < 5) return leaf(scope);
        if (roll < 8) return Formula::negation(gen(scope, rank_left, depth - 1));
        if (roll < 14 || !can_quantify) {
            Formula a = gen(scope, rank_left, depth - 1);
            Formula b = gen(scope, rank_left, depth - 1);
            switch (below(4)) {
            case 0: return Formula::conj(a, b);
            case 1: return Formula::disj(a, b);
            case 2: return Formula::implies(a, b);
            default: return Formula::iff(a, b);
            }
        }
        --quantifiers_left_;
        static const char* const pool[] = {"x", "y", "z", "u", "v", "w"};
        std::string var = pool[below(6)];
        std::string bound;
        if (bounded_) {
            bound = scope[below(scope.size())];
            while (var == bound) var = pool[below(6)];
        }
        auto inner = scope;
        inner.push_back(var);
        Formula body = gen(inner, rank_left - 1, depth - 1);
        if (bounded_)
            return below(2) == 0 ? Formula::bounded_exists(var, bound, body) : Formula::bounded_forall(var, bound, body);
        return below(2) == 0 ? Formula::exists(var, body) : Formula::forall(var, body);
    }

    std::mt19937_64 rng_;
    std::size_t quantifiers_left_ = 0;
    bool bounded_ = false;
};

inline std::vector<Formula> random_sentences(const CorpusOptions& opts)
{
    FormulaGenerator gen(opts.seed);
    std::vector<Formula> out;
    out.reserve(opts.count);
    for (std::size_t i = 0; i < opts.count; ++i)
        out.push_back(gen.sentence(opts.max_rank, opts.max_quantifiers, opts.max_depth));
    return out;
}

// ---------------------------------------------------------------------------
// Random concrete sets

/// A set of H_k of height at most `height`; each set draws 0..k elements.
inline HSet random_hset(std::mt19937_64& rng, std::size_t k, std::size_t height)
{
    if (height == 0 || k == 0) return HSet{};
    std::vector<HSet> elems;
    const auto n = std::uniform_int_distribution<std::size_t>(0, k)(rng);
    for (std::size_t i = 0; i < n; ++i) elems.push_back(random_hset(rng, k, height - 1));
    return HSet::of(std::move(elems));
}

inline std::vector<HSet> random_tuple(std::mt19937_64& rng, std::size_t k, std::size_t l, std::size_t height)
{
    std::vector<HSet> out;
    for (std::size_t i = 0; i < l; ++i) out.push_back(random_hset(rng, k, height));
    return out;
}

// ---------------------------------------------------------------------------
// Reports

struct OracleCase {
    std::string id;
    std::string expected;
    std::string provenance;
    std::string actual;
    bool agree = true;
    bool complete = true;
    double ms = 0;
};

struct OracleReport {
    std::vector<OracleCase> cases;

    bool ok() const
    {
        for (const auto& c : cases)
            if (!c.agree) return false;
        return true;
    }

    std::size_t disagreements() const
    {
        std::size_t n = 0;
        for (const auto& c : cases) n += c.agree ? 0 : 1;
        return n;
    }

    std::size_t incomplete() const
    {
        std::size_t n = 0;
        for (const auto& c : cases) n += c.complete ? 0 : 1;
        return n;
    }

    /// One JSON object per line; `with_time` adds the ms field.
    std::string json_lines(bool with_time = true) const
    {
        std::string out;
        for (const auto& c : cases) {
            nlohmann::ordered_json j;
            j["case"] = c.id;
            j["expected"] = c.expected;
            j["provenance"] = c.provenance;
            j["actual"] = c.actual;
            j["agree"] = c.agree;
            if (with_time) j["ms"] = c.ms;
            out += j.dump();
            out += '\n';
        }
        return out;
    }
};

/// Rank-driven and block-driven decision (and, for k = 0, the one-element
/// evaluator) on every sentence; timeouts and caps are recorded, not fatal.
inline OracleReport differential(std::size_t k, const std::vector<Formula>& corpus, DecideOptions opts = {})
{
    using Clock = std::chrono::steady_clock;
    OracleReport report;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        OracleCase c;
        c.id = "k" + std::to_string(k) + "#" + std::to_string(i) + " " + render(corpus[i]);
        const auto start = Clock::now();
        auto run = [&](Algorithm a) -> std::string {
            opts.algorithm = a;
            try {
                return decide(k, corpus[i], opts).value ? "true" : "false";
            } catch (const IncompleteDecision& e) {
                c.complete = false;
                return e.reason() == IncompleteDecision::Reason::Timeout ? "timeout" : "cap";
            }
        };
        const std::string by_rank = run(Algorithm::Rank);
        const std::string by_block = run(Algorithm::Block);
        if (k == 0) {
            c.expected = eval_k0(desugar_bounded(corpus[i])) ? "true" : "false";
            c.provenance = "one-element evaluator";
            c.actual = "rank=" + by_rank + " block=" + by_block;
            c.agree = !c.complete || (by_rank == c.expected && by_block == c.expected);
        } else {
            c.expected = by_rank;
            c.provenance = "rank-driven search";
            c.actual = by_block;
            c.agree = !c.complete || by_rank == by_block;
        }
        c.ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        report.cases.push_back(std::move(c));
    }
    return report;
}

} // namespace hk
