#pragma once

// Decision by structure search. A formula with free variables is evaluated
// on a tcl-structure whose tuple assigns those variables. At each
// quantifier (or quantifier block) the structure is cut down to the free
// variables of that subformula at the level its rank requires, brought to
// canonical form, and the quantifier ranges over all compatible
// one-step (or one-block) extensions. Results are memoized per canonical
// structure.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hk/bounds.hpp"
#include "hk/canonical.hpp"
#include "hk/error.hpp"
#include "hk/extensions.hpp"
#include "hk/formula.hpp"
#include "hk/k0.hpp"
#include "hk/structure.hpp"

namespace hk {

enum class Algorithm : std::uint8_t { Block, Rank, K0 };

inline std::string_view algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::Block: return "block";
    case Algorithm::Rank: return "rank";
    case Algorithm::K0: return "k0";
    }
    return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s)
{
    if (s == "block") return Algorithm::Block;
    if (s == "rank") return Algorithm::Rank;
    if (s == "k0") return Algorithm::K0;
    return std::nullopt;
}

struct DecideOptions {
    Algorithm algorithm = Algorithm::Block;
    EnumerationCaps caps;
    bool cache = true;
    std::size_t cache_entries = std::size_t{1} << 20;
    std::optional<std::chrono::duration<double>> timeout;
    /// Experimental: run with this level instead of the required one.
    std::optional<BigNat> unsound_m;
    std::function<void(const std::string&)> trace;
    unsigned jobs = 1;
};

struct SearchStats {
    std::uint64_t structures = 0;
    std::uint64_t cache_hits = 0;
};

struct Verdict {
    bool value = false;
    Algorithm algorithm = Algorithm::Block;
    BigNat m = 0;
    std::uint64_t structures = 0;
    std::uint64_t cache_hits = 0;
    std::chrono::milliseconds elapsed{0};
    bool sound = true;
};

/// A decision stopped by timeout or a resource cap, with the statistics
/// gathered so far.
class IncompleteDecision : public Error {
public:
    enum class Reason : std::uint8_t { Timeout, Cap };

    IncompleteDecision(Reason reason, const std::string& what, SearchStats stats)
        : Error(what), reason_(reason), stats_(stats)
    {
    }

    Reason reason() const noexcept { return reason_; }
    const SearchStats& stats() const noexcept { return stats_; }

private:
    Reason reason_;
    SearchStats stats_;
};

namespace detail {

class LruCache {
public:
    struct Entry {
        bool value;
        std::uint64_t structures; // extensions visited below this entry
    };

    explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

    std::optional<Entry> get(const std::string& key)
    {
        auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        order_.splice(order_.begin(), order_, it->second);
        return it->second->second;
    }

    void put(const std::string& key, Entry e)
    {
        if (capacity_ == 0) return;
        auto it = index_.find(key);
        if (it != index_.end()) {
            it->second->second = e;
            order_.splice(order_.begin(), order_, it->second);
            return;
        }
        order_.emplace_front(key, e);
        index_.emplace(key, order_.begin());
        if (order_.size() > capacity_) {
            index_.erase(order_.back().first);
            order_.pop_back();
        }
    }

    std::size_t size() const { return order_.size(); }

private:
    std::size_t capacity_;
    std::list<std::pair<std::string, Entry>> order_;
    std::unordered_map<std::string, std::list<std::pair<std::string, Entry>>::iterator> index_;
};

using Clock = std::chrono::steady_clock;

/// Quantifier blocks of a prenex formula, with per-suffix data.
struct BlockPlan {
    std::vector<QuantifierBlock> blocks;
    Formula matrix;
    std::vector<std::vector<std::string>> free; // free variables of suffix b
    std::vector<AlternationProfile> profile;    // profile of suffix b

    explicit BlockPlan(const PrenexFormula& p) : blocks(p.blocks()), matrix(p.matrix())
    {
        for (std::size_t b = 0; b <= blocks.size(); ++b) {
            std::vector<QuantifierBlock> tail(blocks.begin() + static_cast<std::ptrdiff_t>(b), blocks.end());
            PrenexFormula suffix(tail, matrix);
            free.push_back(free_variables(suffix.as_formula()));
            profile.push_back(suffix.profile());
        }
    }
};

inline std::vector<std::size_t> positions_of(const std::vector<std::string>& wanted,
                                             const std::vector<std::string>& vars)
{
    std::vector<std::size_t> out;
    out.reserve(wanted.size());
    for (const auto& w : wanted) {
        auto it = std::find(vars.rbegin(), vars.rend(), w);
        if (it == vars.rend()) throw PreconditionError("variable '" + w + "' has no tuple position");
        out.push_back(static_cast<std::size_t>(vars.rend() - it - 1));
    }
    return out;
}

class Engine {
public:
    Engine(std::size_t k, const DecideOptions& opts, std::optional<Clock::time_point> deadline)
        : k_(k), opts_(opts), deadline_(deadline), cache_(opts.cache ? opts.cache_entries : 0)
    {
        caps_ = opts.caps;
        caps_.poll = [this] { poll(); };
    }

    SearchStats stats;

    // -- rank-driven evaluation -------------------------------------------

    bool rank_sat(const Structure& s, const std::vector<std::string>& vars, const Formula& f)
    {
        switch (f.kind()) {
        case FormulaKind::Member:
        case FormulaKind::Equal:
        case FormulaKind::True:
        case FormulaKind::False: return atom(s, vars, f);
        case FormulaKind::Not: return !rank_sat(s, vars, f.body());
        case FormulaKind::And: return rank_sat(s, vars, f.lhs()) && rank_sat(s, vars, f.rhs());
        case FormulaKind::Or: return rank_sat(s, vars, f.lhs()) || rank_sat(s, vars, f.rhs());
        case FormulaKind::Implies: return !rank_sat(s, vars, f.lhs()) || rank_sat(s, vars, f.rhs());
        case FormulaKind::Iff: return rank_sat(s, vars, f.lhs()) == rank_sat(s, vars, f.rhs());
        case FormulaKind::Exists:
        case FormulaKind::Forall: return quantifier(s, vars, f);
        case FormulaKind::BoundedExists:
        case FormulaKind::BoundedForall: throw PreconditionError("structure evaluation expects a desugared formula");
        }
        return false;
    }

    /// Canonical structure for quantifier node f under the given tuple.
    Structure rank_focus(const Structure& s, const std::vector<std::string>& vars, const Formula& f,
                         std::string* key_out = nullptr)
    {
        const auto& info = node_info(f);
        auto cut = restrict(s, info.level, positions_of(info.free, vars));
        auto lab = canonical_labeling(cut);
        if (key_out) *key_out = lab.key.bytes();
        return relabel(cut, lab.position);
    }

    /// Per-extension results for the top quantifier, used by parallel runs.
    struct Scan {
        Structure base;
        std::size_t arity;
        Level level, next;
        std::vector<std::string> vars;
    };

    Scan rank_scan(const Structure& s, const std::vector<std::string>& vars, const Formula& f)
    {
        const auto& info = node_info(f);
        Scan out{rank_focus(s, vars, f), 1, info.level, info.body_level, info.free};
        out.vars.push_back(f.var());
        return out;
    }

    // -- block-driven evaluation ------------------------------------------

    bool block_sat(const Structure& s, const std::vector<std::string>& vars, const BlockPlan& plan, std::size_t b)
    {
        if (b == plan.blocks.size()) return rank_sat(s, vars, plan.matrix);
        std::string key;
        Structure c = block_focus(s, vars, plan, b, &key);
        key += "|b" + std::to_string(b);
        const auto& blk = plan.blocks[b];
        const bool want = blk.kind == Quantifier::Exists;
        return memo(key, [&] {
            auto next_vars = plan.free[b];
            next_vars.insert(next_vars.end(), blk.vars.begin(), blk.vars.end());
            return scan(c, block_level(plan, b), blk.vars.size(), block_level(plan, b + 1), want,
                        [&](const Structure& e) { return block_sat(e, next_vars, plan, b + 1); });
        });
    }

    Structure block_focus(const Structure& s, const std::vector<std::string>& vars, const BlockPlan& plan,
                          std::size_t b, std::string* key_out = nullptr)
    {
        auto cut = restrict(s, block_level(plan, b), positions_of(plan.free[b], vars));
        auto lab = canonical_labeling(cut);
        if (key_out) *key_out = lab.key.bytes();
        return relabel(cut, lab.position);
    }

    Scan block_scan(const Structure& s, const std::vector<std::string>& vars, const BlockPlan& plan)
    {
        Scan out{block_focus(s, vars, plan, 0), plan.blocks[0].vars.size(), block_level(plan, 0),
                 block_level(plan, 1), plan.free[0]};
        out.vars.insert(out.vars.end(), plan.blocks[0].vars.begin(), plan.blocks[0].vars.end());
        return out;
    }

    Level block_level(const BlockPlan& plan, std::size_t b)
    {
        const auto& p = plan.profile[b];
        return clip(saturate_level(t_block(k_, p.blocks, p.max_block)));
    }

    const EnumerationCaps& caps() const { return caps_; }

    void poll()
    {
        if (deadline_ && Clock::now() > *deadline_) throw Timeout("time limit exceeded");
    }

    void trace(const std::string& line)
    {
        if (opts_.trace) opts_.trace(line);
    }

private:
    struct NodeInfo {
        std::vector<std::string> free;
        Level level;
        Level body_level;
    };

    const NodeInfo& node_info(const Formula& f)
    {
        auto it = info_.find(f.id());
        if (it != info_.end()) return it->second;
        const std::size_t r = rank(f);
        NodeInfo info{free_variables(f), rank_level(r), rank_level(r - 1)};
        return info_.emplace(f.id(), std::move(info)).first->second;
    }

    Level rank_level(std::size_t r)
    {
        auto it = rank_levels_.find(r);
        if (it != rank_levels_.end()) return it->second;
        const Level l = clip(saturate_level(t_rank(k_, r)));
        rank_levels_.emplace(r, l);
        return l;
    }

    Level clip(Level l) const
    {
        if (opts_.unsound_m) return std::min(l, saturate_level(*opts_.unsound_m));
        return l;
    }

    bool atom(const Structure& s, const std::vector<std::string>& vars, const Formula& f) const
    {
        auto node = [&](const std::string& v) {
            auto it = std::find(vars.rbegin(), vars.rend(), v);
            if (it == vars.rend()) throw PreconditionError("unassigned variable '" + v + "'");
            return s.tuple()[static_cast<std::size_t>(vars.rend() - it - 1)];
        };
        switch (f.kind()) {
        case FormulaKind::Member: return s.has_edge(node(f.other()), node(f.var()));
        case FormulaKind::Equal: return node(f.var()) == node(f.other());
        case FormulaKind::True: return true;
        default: return false;
        }
    }

    bool quantifier(const Structure& s, const std::vector<std::string>& vars, const Formula& f)
    {
        std::string key;
        Structure c = rank_focus(s, vars, f, &key);
        const auto& info = node_info(f);
        key += "|r";
        key += std::to_string(reinterpret_cast<std::uintptr_t>(f.id()));
        const bool want = f.kind() == FormulaKind::Exists;
        return memo(key, [&] {
            auto next_vars = info.free;
            next_vars.push_back(f.var());
            const Formula body = f.body();
            return scan(c, info.level, 1, info.body_level, want,
                        [&](const Structure& e) { return rank_sat(e, next_vars, body); });
        });
    }

    template <class Compute>
    bool memo(const std::string& key, Compute&& compute)
    {
        if (auto hit = cache_.get(key)) {
            ++stats.cache_hits;
            stats.structures += hit->structures;
            return hit->value;
        }
        const auto before = stats.structures;
        const bool value = compute();
        cache_.put(key, {value, stats.structures - before});
        return value;
    }

    /// Existential scan (want = true) or universal scan (want = false).
    template <class Eval>
    bool scan(const Structure& c, Level level, std::size_t arity, Level next, bool want, Eval&& eval)
    {
        trace(std::string(want ? "scan exists" : "scan forall") + " arity=" + std::to_string(arity) +
              " nodes=" + std::to_string(c.size()) + " level=" + std::to_string(level) +
              " next=" + std::to_string(next));
        bool result = !want;
        for_each_extension(
            c, k_, level, arity, next,
            [&](const Structure& e) {
                ++stats.structures;
                if (opts_.trace) trace("  extension nodes=" + std::to_string(e.size()));
                if (eval(e) == want) {
                    result = want;
                    return false;
                }
                return true;
            },
            caps_);
        trace(std::string("  result ") + (result ? "true" : "false"));
        return result;
    }

    std::size_t k_;
    const DecideOptions& opts_;
    std::optional<Clock::time_point> deadline_;
    EnumerationCaps caps_;
    LruCache cache_;
    std::unordered_map<const void*, NodeInfo> info_;
    std::map<std::size_t, Level> rank_levels_;
};

/// Evaluates the top scan's extensions on `jobs` threads and folds the
/// results in enumeration order, so values and structure counts match a
/// sequential run.
template <class EvalItem>
bool parallel_scan(std::size_t k, const DecideOptions& opts, std::optional<Clock::time_point> deadline,
                   const Engine::Scan& sc, bool want, SearchStats& total, EvalItem&& eval_item)
{
    Engine lister(k, opts, deadline);
    std::vector<Structure> items;
    for_each_extension(
        sc.base, k, sc.level, sc.arity, sc.next,
        [&](const Structure& e) {
            items.push_back(e);
            return true;
        },
        lister.caps());
    struct Result {
        bool value = false;
        std::uint64_t structures = 0;
    };
    std::vector<Result> results(items.size());
    std::vector<std::uint64_t> hits(opts.jobs, 0);
    std::vector<std::exception_ptr> errors(opts.jobs);
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < opts.jobs; ++w) {
        workers.emplace_back([&, w] {
            try {
                Engine engine(k, opts, deadline);
                for (std::size_t i = w; i < items.size(); i += opts.jobs) {
                    const auto before = engine.stats.structures;
                    results[i].value = eval_item(engine, items[i]);
                    results[i].structures = engine.stats.structures - before;
                }
                hits[w] = engine.stats.cache_hits;
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (auto h : hits) total.cache_hits += h;
    for (const auto& r : results) {
        total.structures += 1 + r.structures;
        if (r.value == want) return want;
    }
    return !want;
}

/// Replaces every proper quantified subformula without free variables by
/// its truth value as computed by `solve`.
inline Formula settle_closed_parts(const Formula& f, const std::function<bool(const Formula&)>& solve,
                                   bool root = true)
{
    if (f.is_atom() || f.is_constant()) return f;
    if (!root && f.is_quantifier() && free_variables(f).empty()) return Formula::truth(solve(f));
    switch (f.kind()) {
    case FormulaKind::Not: return Formula::negation(settle_closed_parts(f.body(), solve, false));
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
    case FormulaKind::Iff: {
        Formula a = settle_closed_parts(f.lhs(), solve, false);
        Formula b = settle_closed_parts(f.rhs(), solve, false);
        if (f.kind() == FormulaKind::And) return Formula::conj(std::move(a), std::move(b));
        if (f.kind() == FormulaKind::Or) return Formula::disj(std::move(a), std::move(b));
        if (f.kind() == FormulaKind::Implies) return Formula::implies(std::move(a), std::move(b));
        return Formula::iff(std::move(a), std::move(b));
    }
    case FormulaKind::Exists: return Formula::exists(f.var(), settle_closed_parts(f.body(), solve, false));
    case FormulaKind::Forall: return Formula::forall(f.var(), settle_closed_parts(f.body(), solve, false));
    case FormulaKind::BoundedExists:
        return Formula::bounded_exists(f.var(), f.other(), settle_closed_parts(f.body(), solve, false));
    case FormulaKind::BoundedForall:
        return Formula::bounded_forall(f.var(), f.other(), settle_closed_parts(f.body(), solve, false));
    default: return f;
    }
}

inline void check_sound_level(std::size_t k, Level m, const BigNat& required, const DecideOptions& opts)
{
    if (opts.unsound_m) return;
    if (BigNat{m} < required)
        throw PreconditionError("level " + std::to_string(m) + " is below the required " + required.str() +
                                " (k=" + std::to_string(k) + ")");
}

} // namespace detail

/// S |= f(tuple) where the tuple assigns the free variables of f in order
/// of first occurrence; s must be a tcl^k_m-structure with m >= t_k(rank f).
inline bool sksat(const Structure& s, Level m, const Formula& f, std::size_t k, const DecideOptions& opts = {})
{
    const Formula g = desugar_bounded(f);
    const auto vars = free_variables(g);
    if (vars.size() != s.arity()) throw PreconditionError("tuple length differs from the number of free variables");
    if (!validate(s, k, m)) throw PreconditionError("structure is not a tcl-structure at the given k, m");
    detail::check_sound_level(k, m, t_rank(k, rank(g)), opts);
    detail::Engine engine(k, opts, std::nullopt);
    return engine.rank_sat(s, vars, g);
}

/// Block-wise variant; m >= t_k(r, q) for the formula's alternation profile.
inline bool bsksat(const Structure& s, Level m, const PrenexFormula& p, std::size_t k, const DecideOptions& opts = {})
{
    detail::BlockPlan plan(p);
    const auto& vars = plan.free[0];
    if (vars.size() != s.arity()) throw PreconditionError("tuple length differs from the number of free variables");
    if (!validate(s, k, m)) throw PreconditionError("structure is not a tcl-structure at the given k, m");
    detail::check_sound_level(k, m, t_block(k, plan.profile[0].blocks, plan.profile[0].max_block), opts);
    detail::Engine engine(k, opts, std::nullopt);
    return engine.block_sat(s, vars, plan, 0);
}

/// Decides a sentence in S_k by evaluation on the empty structure.
inline Verdict decide(std::size_t k, const Formula& sentence, const DecideOptions& opts = {})
{
    const auto start = detail::Clock::now();
    std::optional<detail::Clock::time_point> deadline;
    if (opts.timeout)
        deadline = start + std::chrono::duration_cast<detail::Clock::duration>(*opts.timeout);
    if (!is_sentence(sentence)) throw PreconditionError("decide expects a sentence (no free variables)");
    const Formula f = desugar_bounded(sentence);

    Verdict v;
    v.algorithm = opts.algorithm;
    v.sound = !opts.unsound_m.has_value();
    SearchStats stats;
    try {
        switch (opts.algorithm) {
        case Algorithm::K0: {
            if (k != 0) throw PreconditionError("the k0 algorithm applies only to k = 0");
            v.m = 0;
            v.value = eval_k0(f);
            break;
        }
        case Algorithm::Rank: {
            v.m = opts.unsound_m ? *opts.unsound_m : t_rank(k, rank(f));
            detail::Engine engine(k, opts, deadline);
            if (opts.jobs > 1 && f.is_quantifier() && !f.is_bounded_quantifier()) {
                auto sc = engine.rank_scan(Structure{}, {}, f);
                const Formula body = f.body();
                v.value = detail::parallel_scan(k, opts, deadline, sc, f.kind() == FormulaKind::Exists, stats,
                                                [&](detail::Engine& e, const Structure& s) {
                                                    return e.rank_sat(s, sc.vars, body);
                                                });
            } else {
                try {
                    v.value = engine.rank_sat(Structure{}, {}, f);
                } catch (...) {
                    stats = engine.stats;
                    throw;
                }
                stats = engine.stats;
            }
            break;
        }
        case Algorithm::Block: {
            // closed quantified parts are decided on their own first, so
            // prenexing cannot copy them into extra blocks
            std::function<bool(const Formula&, bool)> solve = [&](const Formula& g, bool top) {
                const Formula h = detail::settle_closed_parts(g, [&](const Formula& c) { return solve(c, false); });
                const PrenexFormula p = prenex(h);
                const auto prof = p.profile();
                if (top) v.m = opts.unsound_m ? *opts.unsound_m : t_block(k, prof.blocks, prof.max_block);
                detail::BlockPlan plan(p);
                if (top && opts.jobs > 1 && !plan.blocks.empty()) {
                    detail::Engine engine(k, opts, deadline);
                    auto sc = engine.block_scan(Structure{}, {}, plan);
                    return detail::parallel_scan(k, opts, deadline, sc, plan.blocks[0].kind == Quantifier::Exists,
                                                 stats, [&](detail::Engine& e, const Structure& s) {
                                                     return e.block_sat(s, sc.vars, plan, 1);
                                                 });
                }
                detail::Engine engine(k, opts, deadline);
                auto flush = [&] {
                    stats.structures += engine.stats.structures;
                    stats.cache_hits += engine.stats.cache_hits;
                };
                bool value = false;
                try {
                    value = engine.block_sat(Structure{}, {}, plan, 0);
                } catch (...) {
                    flush();
                    throw;
                }
                flush();
                return value;
            };
            v.value = solve(f, true);
            break;
        }
        }
    } catch (const Timeout& e) {
        throw IncompleteDecision(IncompleteDecision::Reason::Timeout, e.what(), stats);
    } catch (const CapExceeded& e) {
        throw IncompleteDecision(IncompleteDecision::Reason::Cap, e.what(), stats);
    }
    v.structures = stats.structures;
    v.cache_hits = stats.cache_hits;
    v.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(detail::Clock::now() - start);
    return v;
}

inline Verdict decide(std::size_t k, std::string_view sentence, const DecideOptions& opts = {})
{
    return decide(k, parse_formula(sentence), opts);
}

} // namespace hk
