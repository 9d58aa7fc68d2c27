#pragma once

// The acceptance suite: nine numbered checks with fixed budgets, shared by
// `hk selftest` and the acceptance test binary.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hk/bounds.hpp"
#include "hk/canonical.hpp"
#include "hk/decide.hpp"
#include "hk/extensions.hpp"
#include "hk/formula.hpp"
#include "hk/hset.hpp"
#include "hk/oracle.hpp"
#include "hk/qe.hpp"
#include "hk/structure.hpp"

namespace hk::acceptance {

enum class SuiteLevel : std::uint8_t { Quick, Full };

struct Outcome {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0;
    double budget = 0;
};

inline std::string format_line(const Outcome& o)
{
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << "criterion " << o.id << " " << (o.pass ? "PASS" : "FAIL") << "  " << o.title << ": " << o.detail << " ("
        << o.seconds << " s, budget " << o.budget << " s)";
    return out.str();
}

struct EnumParams {
    std::size_t k;
    Level m;
    std::size_t l;
};

/// Every (k <= 2, m, l) with l * k^{<=m} <= 6; m <= 3 where the bound does
/// not limit it (k = 0 or l = 0).
inline std::vector<EnumParams> enumeration_params()
{
    std::vector<EnumParams> out;
    for (std::size_t k = 0; k <= 2; ++k)
        for (std::size_t l = 0; l <= 6; ++l)
            for (Level m = 0; m <= 5; ++m) {
                if ((k == 0 || l == 0) && m > 3) continue;
                if (node_bound(k, m, l) <= 6) out.push_back({k, m, l});
            }
    return out;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs body(detail) -> bool, catching library errors as failures, and
// applies the time budget.
template <class Body>
Outcome timed(int id, std::string title, double budget, Body&& body)
{
    Outcome o;
    o.id = id;
    o.title = std::move(title);
    o.budget = budget;
    const auto start = Clock::now();
    try {
        o.pass = body(o.detail);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail += std::string(o.detail.empty() ? "" : "; ") + "error: " + e.what();
    }
    o.seconds = seconds_since(start);
    if (o.seconds >= budget) {
        o.pass = false;
        o.detail += "; over budget";
    }
    return o;
}

inline std::string tuple_text(const std::vector<HSet>& t)
{
    std::string out = "(";
    for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + t[i].render();
    return out + ")";
}

inline std::map<std::string, HSet> assign(const std::vector<std::string>& names, const std::vector<HSet>& values)
{
    std::map<std::string, HSet> out;
    for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = values[i];
    return out;
}

/// Values of `vars` drawn from (names -> values), in the order of `vars`.
inline std::vector<HSet> project(const std::vector<std::string>& vars, const std::map<std::string, HSet>& env)
{
    std::vector<HSet> out;
    for (const auto& v : vars) out.push_back(env.at(v));
    return out;
}

/// Corpus decisions use a larger node cap than the command-line default:
/// prenexing a biconditional duplicates its quantifiers, and some k = 1
/// sentences then need extension levels whose chain bound passes 64.
inline DecideOptions corpus_options()
{
    DecideOptions o;
    o.caps.max_nodes = 256;
    o.timeout = std::chrono::duration<double>(60);
    return o;
}

inline std::size_t corpus_size(SuiteLevel level) { return level == SuiteLevel::Full ? 200 : 40; }

} // namespace detail

// ---------------------------------------------------------------------------

inline Outcome bound_tables()
{
    return detail::timed(1, "bound tables", 1.0, [](std::string& detail) {
        std::size_t checks = 0;
        std::vector<std::string> bad;
        for (std::uint64_t n = 0; n <= 20; ++n, ++checks) {
            const BigNat want = BigNat{3} * ((BigNat{1} << static_cast<unsigned>(n)) - 1);
            if (t_rank(1, n) != want) bad.push_back("t_rank(1," + std::to_string(n) + ")");
        }
        for (std::uint64_t k = 0; k <= 10; ++k, ++checks)
            if (t_rank(k, 1) != BigNat{k + 2}) bad.push_back("t_rank(" + std::to_string(k) + ",1)");
        ++checks;
        if (t_rank(2, 2) != 68) bad.push_back("t_rank(2,2)");
        for (std::uint64_t k = 0; k <= 3; ++k)
            for (std::uint64_t n = 0; n <= 3; ++n, ++checks)
                if (t_block(k, n, 1) != t_rank(k, n))
                    bad.push_back("t_block(" + std::to_string(k) + "," + std::to_string(n) + ",1)");
        for (std::uint64_t k : {2, 3, 4})
            for (std::uint64_t n : {1, 2, 3}) {
                ++checks;
                if (!bound_check(k, n)) bad.push_back("bound_check(" + std::to_string(k) + "," + std::to_string(n) + ")");
                for (std::uint64_t q : {1, 2, 4}) {
                    ++checks;
                    if (!bound_check(k, n, q))
                        bad.push_back("bound_check(" + std::to_string(k) + "," + std::to_string(n) + "," +
                                      std::to_string(q) + ")");
                }
            }
        detail = std::to_string(checks) + " checks, " + std::to_string(bad.size()) + " mismatches";
        for (const auto& b : bad) detail += " " + b;
        return bad.empty();
    });
}

inline Outcome enumeration_counts()
{
    return detail::timed(2, "enumeration counts", 120.0, [](std::string& detail) {
        std::size_t agree = 0;
        std::vector<std::string> bad;
        std::map<std::tuple<std::size_t, Level, std::size_t>, std::size_t> counts;
        for (const auto& p : enumeration_params()) {
            const auto fast = enumerate(p.k, p.m, p.l);
            const auto slow = brute_enumerate(p.k, p.m, p.l, node_bound(p.k, p.m, p.l));
            bool same = fast.size() == slow.size();
            for (std::size_t i = 0; same && i < fast.size(); ++i) same = fast[i].key == slow[i].key;
            counts[{p.k, p.m, p.l}] = fast.size();
            const std::string tag =
                "(" + std::to_string(p.k) + "," + std::to_string(p.m) + "," + std::to_string(p.l) + ")";
            if (same)
                ++agree;
            else
                bad.push_back(tag + " " + std::to_string(fast.size()) + " vs " + std::to_string(slow.size()));
        }
        // fixed anchors
        const std::vector<std::tuple<std::size_t, Level, std::size_t, std::size_t>> anchors = {
            {1, 1, 1, 2}, {2, 1, 1, 4}, {2, 0, 2, 4}, {0, 0, 1, 1}, {0, 3, 2, 1}, {0, 2, 6, 1}};
        for (const auto& [k, m, l, want] : anchors)
            if (counts.at({k, m, l}) != want)
                bad.push_back("anchor (" + std::to_string(k) + "," + std::to_string(m) + "," + std::to_string(l) +
                              ") = " + std::to_string(counts.at({k, m, l})));
        detail = std::to_string(agree) + "/" + std::to_string(counts.size()) + " parameter sets agree with brute force";
        for (const auto& b : bad) detail += "; " + b;
        return bad.empty();
    });
}

inline Outcome axiom_suites()
{
    return detail::timed(3, "axiom suites", 3600.0, [](std::string& detail) {
        struct Item {
            std::size_t k;
            std::string name, text;
            bool expected;
        };
        std::vector<Item> items;
        for (std::size_t k = 0; k <= 2; ++k)
            for (const auto& a : axiom_suite(k)) {
                if (!a.feasible) continue;
                items.push_back({k, a.name, a.text, true});
                items.push_back({k, "not " + a.name, "!(" + a.text + ")", false});
            }
        items.push_back({2, "no self-member", "exists x. x in x", false});
        items.push_back({2, "some membership", "exists x, y. x in y", true});

        DecideOptions opts;
        opts.timeout = std::chrono::duration<double>(60);
        std::vector<std::string> bad;
        double slowest = 0;
        for (const auto& it : items) {
            const auto start = detail::Clock::now();
            std::string got;
            try {
                got = decide(it.k, it.text, opts).value ? "true" : "false";
            } catch (const IncompleteDecision& e) {
                got = e.what();
            }
            const double s = detail::seconds_since(start);
            slowest = std::max(slowest, s);
            if (got != (it.expected ? "true" : "false") || s >= 60)
                bad.push_back("k=" + std::to_string(it.k) + " " + it.name + " -> " + got);
        }
        detail = std::to_string(items.size() - bad.size()) + "/" + std::to_string(items.size()) +
                 " sentences as expected, slowest " + std::to_string(slowest) + " s";
        for (const auto& b : bad) detail += "; " + b;
        return bad.empty();
    });
}

inline Outcome completeness(SuiteLevel level, std::uint64_t seed)
{
    return detail::timed(4, "completeness", 600.0, [&](std::string& detail) {
        CorpusOptions co;
        co.count = detail::corpus_size(level);
        co.seed = seed;
        const auto corpus = random_sentences(co);
        const auto opts = detail::corpus_options();
        std::size_t ok = 0, total = 0;
        std::vector<std::string> bad;
        for (std::size_t k = 0; k <= 1; ++k)
            for (const auto& f : corpus) {
                ++total;
                try {
                    const bool a = decide(k, f, opts).value;
                    const bool b = decide(k, Formula::negation(f), opts).value;
                    if (a != b)
                        ++ok;
                    else
                        bad.push_back("k=" + std::to_string(k) + " " + render(f));
                } catch (const IncompleteDecision& e) {
                    bad.push_back("k=" + std::to_string(k) + " " + render(f) + " incomplete: " + e.what());
                }
            }
        detail = std::to_string(ok) + "/" + std::to_string(total) + " sentences decided exactly one way";
        for (std::size_t i = 0; i < bad.size() && i < 5; ++i) detail += "; " + bad[i];
        return bad.empty();
    });
}

inline Outcome differential_algorithms(SuiteLevel level, std::uint64_t seed)
{
    return detail::timed(5, "differential algorithms", 600.0, [&](std::string& detail) {
        CorpusOptions co;
        co.count = detail::corpus_size(level);
        co.seed = seed;
        const auto corpus = random_sentences(co);
        const auto opts = detail::corpus_options();
        CorpusOptions deep;
        deep.count = level == SuiteLevel::Full ? 500 : 100;
        deep.max_rank = 6;
        deep.max_quantifiers = 8;
        deep.max_depth = 8;
        deep.seed = seed + 1;
        std::size_t cases = 0, disagree = 0, incomplete = 0;
        for (const auto& [k, sentences] : {std::pair{std::size_t{0}, corpus}, std::pair{std::size_t{1}, corpus},
                                           std::pair{std::size_t{0}, random_sentences(deep)}}) {
            const auto report = differential(k, sentences, opts);
            cases += report.cases.size();
            disagree += report.disagreements();
            incomplete += report.incomplete();
            for (const auto& c : report.cases)
                if (!c.agree) detail += c.id + " expected " + c.expected + " got " + c.actual + "; ";
        }
        detail += std::to_string(cases) + " cases, " + std::to_string(disagree) + " disagreements, " +
                  std::to_string(incomplete) + " incomplete";
        return disagree == 0 && incomplete == 0;
    });
}

inline Outcome realization_round_trip()
{
    return detail::timed(6, "realization round trip", 120.0, [](std::string& detail) {
        std::size_t checked = 0;
        std::vector<std::string> bad;
        for (const auto& p : enumeration_params()) {
            if (p.k == 0) continue;
            for (const auto& c : enumerate(p.k, p.m, p.l)) {
                ++checked;
                const auto sets = realize(c.structure, p.k, p.m);
                bool ok = std::all_of(sets.begin(), sets.end(), [&](HSet s) { return check_k(s, p.k); });
                ok = ok && isomorphic(tcl_structure(sets, p.m), c.structure);
                if (!ok && bad.size() < 5)
                    bad.push_back("(" + std::to_string(p.k) + "," + std::to_string(p.m) + "," + std::to_string(p.l) +
                                  ") " + c.key.hex());
            }
        }
        detail = std::to_string(checked) + " structures realized";
        for (const auto& b : bad) detail += "; " + b;
        return bad.empty();
    });
}

inline Outcome defining_formulas(std::uint64_t seed)
{
    return detail::timed(7, "characteristic and defining formulas", 600.0, [&](std::string& detail) {
        struct Config {
            std::size_t k;
            Level n;
            std::size_t height;
        };
        const std::vector<Config> configs = {{1, 1, 4}, {1, 2, 4}, {2, 1, 3}};
        std::mt19937_64 rng(seed);
        std::map<std::tuple<std::size_t, Level, std::size_t>, std::vector<Canonical>> classes;
        std::size_t completed = 0, disagree = 0, over = 0, positive = 0;
        std::vector<std::string> bad;
        for (std::size_t i = 0; i < 100; ++i) {
            const auto& cfg = configs[i % configs.size()];
            const std::size_t l = 1 + (i / configs.size()) % 2;
            const auto a = random_tuple(rng, cfg.k, l, cfg.height);
            auto b = random_tuple(rng, cfg.k, l, cfg.height);
            if (i % 2 == 0)
                for (int tries = 0; tries < 200 && !sim_n(a, b, cfg.n); ++tries)
                    b = random_tuple(rng, cfg.k, l, cfg.height);
            try {
                const Structure s = tcl_structure(a, cfg.n);
                auto& cls = classes[{cfg.k, cfg.n, l}];
                if (cls.empty()) cls = enumerate(cfg.k, cfg.n, l);
                const auto names = default_tuple_names(l);
                const Formula def = defining_formula(s, cls, names);
                const bool expected = sim_n(a, b, cfg.n);
                const bool actual = eval_bounded(def, detail::assign(names, b));
                ++completed;
                positive += expected ? 1 : 0;
                if (expected != actual) {
                    ++disagree;
                    bad.push_back(detail::tuple_text(a) + " vs " + detail::tuple_text(b));
                }
                const BigNat limit = BigNat{l} * (k_leq(cfg.k, cfg.n) - 1);
                if (BigNat{quantifier_count(characteristic_formula(s, names))} > limit) ++over;
            } catch (const CapExceeded&) {
            }
        }
        detail = std::to_string(completed) + " pairs completed (" + std::to_string(positive) + " equivalent), " +
                 std::to_string(disagree) + " disagreements, " + std::to_string(over) +
                 " quantifier-count violations";
        for (std::size_t i = 0; i < bad.size() && i < 5; ++i) detail += "; " + bad[i];
        return completed >= 50 && disagree == 0 && over == 0;
    });
}

inline Outcome transfer(std::uint64_t seed)
{
    return detail::timed(8, "transfer spot check", 600.0, [&](std::string& detail) {
        constexpr std::size_t k = 1;
        std::mt19937_64 rng(seed);
        FormulaGenerator gen(seed + 7);
        std::size_t pairs = 0, formulas = 0, violations = 0;
        std::vector<std::string> bad;
        for (std::size_t n = 1; n <= 2; ++n) {
            const Level level = saturate_level(t_rank(k, n));
            for (std::size_t l = 1; l <= 2; ++l) {
                // group random tuples of towers by their level-t closure
                std::map<CanonicalKey, std::vector<std::vector<HSet>>> buckets;
                for (int i = 0; i < 400; ++i) {
                    std::vector<HSet> t;
                    for (std::size_t j = 0; j < l; ++j)
                        t.push_back(HSet::tower(std::uniform_int_distribution<std::size_t>(0, 2 * level + 2)(rng)));
                    auto& bucket = buckets[canonical_key(tcl_structure(t, level))];
                    if (std::find(bucket.begin(), bucket.end(), t) == bucket.end()) bucket.push_back(std::move(t));
                }
                std::size_t taken = 0;
                for (const auto& [key, bucket] : buckets) {
                    for (std::size_t i = 1; i < bucket.size() && taken < 10; ++i, ++taken) {
                        const auto& a = bucket[0];
                        const auto& b = bucket[i];
                        if (!sim_n(a, b, level)) {
                            ++violations;
                            continue;
                        }
                        ++pairs;
                        const auto names = default_tuple_names(l);
                        const auto env_a = detail::assign(names, a), env_b = detail::assign(names, b);
                        for (int j = 0; j < 8; ++j) {
                            const bool bounded = j % 2 == 0;
                            const Formula f = bounded ? gen.bounded_formula(names, n, n + 1, 5)
                                                      : gen.formula(names, n, n + 1, 5);
                            const Formula g = desugar_bounded(f);
                            const auto vars = free_variables(g);
                            const Level need = saturate_level(t_rank(k, rank(g)));
                            auto by_search = [&](const std::map<std::string, HSet>& env) {
                                return sksat(tcl_structure(detail::project(vars, env), need), need, g, k);
                            };
                            ++formulas;
                            const bool sa = by_search(env_a), sb = by_search(env_b);
                            bool ok = sa == sb;
                            if (bounded) {
                                const bool ea = eval_bounded(f, env_a), eb = eval_bounded(f, env_b);
                                ok = ok && ea == eb && ea == sa;
                            }
                            if (!ok) {
                                ++violations;
                                if (bad.size() < 5)
                                    bad.push_back(render(f) + " on " + detail::tuple_text(a) + " / " +
                                                  detail::tuple_text(b));
                            }
                        }
                    }
                }
            }
        }
        detail = std::to_string(pairs) + " equivalent pairs, " + std::to_string(formulas) + " formulas, " +
                 std::to_string(violations) + " violations";
        for (const auto& b : bad) detail += "; " + b;
        return pairs > 0 && violations == 0;
    });
}

inline const std::vector<std::string>& qe_inputs()
{
    static const std::vector<std::string> inputs = {
        "forall t. !(t in x)",
        "exists y. x in y",
        "exists t. (t in x & t in y)",
        "forall t. (t in x -> t in y)",
        "exists z. (x in z & !(y in z))",
    };
    return inputs;
}

inline Outcome quantifier_elimination(std::uint64_t seed)
{
    return detail::timed(9, "quantifier elimination", 300.0, [&](std::string& detail) {
        constexpr std::size_t k = 1;
        std::mt19937_64 rng(seed);
        std::size_t checks = 0;
        std::vector<std::string> bad;
        for (const auto& text : qe_inputs()) {
            const Formula f = desugar_bounded(parse_formula(text));
            const Formula out = quantifier_eliminate(k, f);
            if (!is_bounded_existential_combination(out)) {
                bad.push_back(text + ": output has other quantifiers");
                continue;
            }
            const auto vars = free_variables(f);
            const Level n = saturate_level(t_rank(k, rank(f)));
            for (const auto& c : enumerate(k, n, vars.size())) {
                ++checks;
                const bool want = sksat(c.structure, n, f, k);
                if (eval_bounded(out, detail::assign(vars, realize(c.structure, k, n))) != want)
                    bad.push_back(text + " on class " + c.key.hex());
            }
            for (int i = 0; i < 50; ++i) {
                ++checks;
                const auto sets = random_tuple(rng, k, vars.size(), n + 3);
                const bool want = sksat(tcl_structure(sets, n), n, f, k);
                if (eval_bounded(out, detail::assign(vars, sets)) != want)
                    bad.push_back(text + " on " + detail::tuple_text(sets));
            }
        }
        detail = std::to_string(qe_inputs().size()) + " formulas, " + std::to_string(checks) + " evaluations, " +
                 std::to_string(bad.size()) + " mismatches";
        for (std::size_t i = 0; i < bad.size() && i < 5; ++i) detail += "; " + bad[i];
        return bad.empty();
    });
}

/// Runs criteria 1-9 in order; `report` sees each outcome as it finishes.
inline std::vector<Outcome> run_all(SuiteLevel level, std::uint64_t seed = kDefaultSeed,
                                    const std::function<void(const Outcome&)>& report = {})
{
    std::vector<Outcome> out;
    auto add = [&](Outcome o) {
        if (report) report(o);
        out.push_back(std::move(o));
    };
    add(bound_tables());
    add(enumeration_counts());
    add(axiom_suites());
    add(completeness(level, seed));
    add(differential_algorithms(level, seed));
    add(realization_round_trip());
    add(defining_formulas(seed));
    add(transfer(seed));
    add(quantifier_elimination(seed));
    return out;
}

} // namespace hk::acceptance
