#pragma once

// The `hk` command line. run() takes the arguments after the program name
// and returns the exit status: 0 success, 1 self-test failure, 2 usage or
// input error, 3 timeout or cap, 4 internal error.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hk/acceptance.hpp"
#include "hk/bounds.hpp"
#include "hk/decide.hpp"
#include "hk/error.hpp"
#include "hk/extensions.hpp"
#include "hk/formula.hpp"
#include "hk/hset.hpp"
#include "hk/io.hpp"
#include "hk/qe.hpp"
#include "hk/structure.hpp"

namespace hk::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kIncomplete = 3, kInternal = 4 };

namespace detail {

struct Settings {
    std::size_t k = 0;
    std::string formula;
    std::string file;
    std::string algo = "block";
    double timeout = 0;
    std::size_t max_nodes = 64;
    std::size_t max_classes = 10'000'000;
    std::string unsound_m;
    std::uint64_t seed = kDefaultSeed;
    bool trace = false;
    unsigned jobs = 1;
    std::string format = "text";
    bool timing = false;
    bool no_cache = false;
    // enumerate / check-structure / bounds
    Level m = 0;
    std::size_t l = 0;
    bool count_only = false;
    std::uint64_t n = 0;
    std::uint64_t q = 0;
    // eval
    std::string assignment;
    // selftest
    std::string level = "quick";
    int criterion = 0;
};

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Formula read_formula(const Settings& s)
{
    if (!s.file.empty()) return parse_formula(read_file(s.file));
    if (s.formula.empty()) throw PreconditionError("a formula argument or --file is required");
    return parse_formula(s.formula);
}

inline EnumerationCaps caps_of(const Settings& s)
{
    EnumerationCaps c;
    c.max_nodes = s.max_nodes;
    c.max_classes = s.max_classes;
    return c;
}

inline DecideOptions options_of(const Settings& s, std::ostream& err)
{
    DecideOptions o;
    auto algo = parse_algorithm(s.algo);
    if (!algo) throw PreconditionError("unknown algorithm '" + s.algo + "'");
    o.algorithm = *algo;
    o.caps = caps_of(s);
    o.cache = !s.no_cache;
    if (s.timeout > 0) o.timeout = std::chrono::duration<double>(s.timeout);
    if (!s.unsound_m.empty()) {
        if (!std::all_of(s.unsound_m.begin(), s.unsound_m.end(), [](char c) { return c >= '0' && c <= '9'; }))
            throw PreconditionError("--unsound-m expects a natural number");
        o.unsound_m = BigNat(s.unsound_m);
    }
    if (s.trace) o.trace = [&err](const std::string& line) { err << line << '\n'; };
    o.jobs = std::max(1u, s.jobs);
    return o;
}

inline bool json_format(const Settings& s)
{
    if (s.format != "text" && s.format != "json" && s.format != "kv")
        throw PreconditionError("unknown format '" + s.format + "'");
    return s.format == "json";
}

inline std::string big_text(const BigNat& v)
{
    const std::string digits = v.str();
    if (digits.size() <= 80) return digits;
    return "(" + std::to_string(digits.size()) + " digits)";
}

// -- subcommands ----------------------------------------------------------

inline int cmd_decide(const Settings& s, std::ostream& out, std::ostream& err)
{
    const bool json = json_format(s);
    const Formula f = read_formula(s);
    const auto opts = options_of(s, err);
    try {
        const Verdict v = decide(s.k, f, opts);
        if (json)
            out << verdict_to_json(v, s.timing).dump() << '\n';
        else if (s.format == "kv")
            out << verdict_to_text(v, s.timing);
        else
            out << (v.value ? "true" : "false") << '\n';
        return kOk;
    } catch (const IncompleteDecision& e) {
        if (json) {
            nlohmann::ordered_json j;
            j["error"] = e.reason() == IncompleteDecision::Reason::Timeout ? "timeout" : "cap";
            j["message"] = e.what();
            j["structures"] = e.stats().structures;
            j["cache_hits"] = e.stats().cache_hits;
            out << j.dump() << '\n';
        }
        err << "incomplete: " << e.what() << " (structures=" << e.stats().structures
            << ", cache_hits=" << e.stats().cache_hits << ")\n";
        return kIncomplete;
    }
}

inline int cmd_enumerate(const Settings& s, std::ostream& out)
{
    const bool json = json_format(s);
    const auto classes = enumerate(s.k, s.m, s.l, caps_of(s));
    if (s.count_only) {
        if (json)
            out << nlohmann::ordered_json{{"k", s.k}, {"m", s.m}, {"l", s.l}, {"count", classes.size()}}.dump() << '\n';
        else
            out << classes.size() << '\n';
        return kOk;
    }
    for (const auto& c : classes) {
        if (json) {
            out << structure_to_json(c.structure).dump() << '\n';
            continue;
        }
        out << c.key.hex() << "  nodes=" << c.structure.size() << " edges=";
        bool first = true;
        for (const auto& [u, v] : named_edges(c.structure)) {
            out << (first ? "" : ",") << u << ">" << v;
            first = false;
        }
        if (first) out << "-";
        out << " tuple=";
        for (std::size_t i = 0; i < c.structure.arity(); ++i)
            out << (i ? "," : "") << c.structure.name(c.structure.tuple()[i]);
        out << '\n';
    }
    if (!json) out << classes.size() << " classes\n";
    return kOk;
}

inline int cmd_check_structure(const Settings& s, std::ostream& out)
{
    const bool json = json_format(s);
    if (s.file.empty()) throw PreconditionError("check-structure reads the structure from --file");
    const Structure st = parse_structure(read_file(s.file));
    const bool ok = validate(st, s.k, s.m);
    const std::size_t bound = node_bound(s.k, s.m, st.arity());
    if (json) {
        nlohmann::ordered_json j;
        j["valid"] = ok;
        j["nodes"] = st.size();
        j["edges"] = st.edge_count();
        j["arity"] = st.arity();
        j["acyclic"] = is_acyclic(st);
        if (ok) j["key"] = canonical_key(st).hex();
        out << j.dump() << '\n';
    } else {
        out << (ok ? "valid" : "invalid") << '\n';
        out << "nodes=" << st.size() << " edges=" << st.edge_count() << " arity=" << st.arity()
            << " node_bound=" << bound << '\n';
        if (ok) out << "key=" << canonical_key(st).hex() << '\n';
    }
    return kOk;
}

inline int cmd_qe(const Settings& s, std::ostream& out, std::ostream& err)
{
    const bool json = json_format(s);
    const Formula f = read_formula(s);
    const Formula g = quantifier_eliminate(s.k, f, options_of(s, err));
    if (json) {
        nlohmann::ordered_json j;
        j["input"] = render(f);
        j["free"] = free_variables(f);
        j["output"] = render(g);
        j["quantifiers"] = quantifier_count(g);
        out << j.dump() << '\n';
    } else {
        out << render(g) << '\n';
    }
    return kOk;
}

inline int cmd_eval(const Settings& s, std::ostream& out, std::ostream& err)
{
    const bool json = json_format(s);
    const Formula f = read_formula(s);
    const auto env = parse_assignment(s.assignment);
    for (const auto& [name, set] : env)
        if (!check_k(set, s.k)) throw PreconditionError("'" + name + "' is not hereditarily of size at most k");
    const Formula g = desugar_bounded(f);
    const auto vars = free_variables(g);
    for (const auto& v : vars)
        if (!env.count(v)) throw PreconditionError("unassigned variable '" + v + "'");
    bool value = false;
    std::string method;
    if (is_bounded(f)) {
        value = eval_bounded(f, env);
        method = "direct";
    } else {
        // truth in H_k is determined by the closure at the rank's level
        const Level level = saturate_level(t_rank(s.k, rank(g)));
        std::vector<HSet> tuple;
        for (const auto& v : vars) tuple.push_back(env.at(v));
        value = sksat(tcl_structure(tuple, level), level, g, s.k, options_of(s, err));
        method = "search";
    }
    if (json)
        out << nlohmann::ordered_json{{"value", value}, {"method", method}}.dump() << '\n';
    else
        out << (value ? "true" : "false") << '\n';
    return kOk;
}

inline nlohmann::ordered_json comparison_json(const BoundComparison& c)
{
    nlohmann::ordered_json j;
    j["exponent"] = c.exponent;
    j["height"] = c.height;
    j["log2_upper"] = c.log2_upper.str();
    j["holds"] = c.holds;
    return j;
}

inline int cmd_bounds(const Settings& s, std::ostream& out)
{
    const bool json = json_format(s);
    nlohmann::ordered_json j;
    j["k"] = s.k;
    j["n"] = s.n;
    auto value_or_cap = [](auto&& compute) -> std::optional<BigNat> {
        try {
            return compute();
        } catch (const CapExceeded&) {
            return std::nullopt;
        }
    };
    const auto leq = value_or_cap([&] { return k_leq(s.k, BigNat{s.n}); });
    const auto rank_value = value_or_cap([&] { return t_rank(s.k, s.n); });
    std::vector<std::string> lines;
    j["k_leq"] = leq ? leq->str() : "cap";
    j["t_rank"] = rank_value ? rank_value->str() : "cap";
    lines.push_back("k^{<=n}=" + (leq ? big_text(*leq) : std::string("(exceeds bit cap)")));
    lines.push_back("t_rank=" + (rank_value ? big_text(*rank_value) : std::string("(exceeds bit cap)")));
    auto describe = [](const std::string& what, const BoundComparison& c) {
        return what + " <= 2^{" + std::to_string(c.exponent) + "}_" + std::to_string(c.height) + ": " +
               (c.holds ? "holds" : "fails");
    };
    if (s.k >= 2 && s.n >= 1) {
        j["c_k"] = c_k(s.k);
        try {
            const auto c = compare_rank_bound(s.k, s.n);
            j["rank_bound"] = comparison_json(c);
            lines.push_back("c_k=" + std::to_string(c_k(s.k)) + "; " + describe("t_rank", c));
        } catch (const CapExceeded& e) {
            j["rank_bound"] = "cap";
            lines.push_back(std::string("rank bound: ") + e.what());
        }
    } else {
        lines.push_back("tower comparison applies for k >= 2 and n >= 1");
    }
    if (s.q > 0) {
        j["q"] = s.q;
        const auto block_value = value_or_cap([&] { return t_block(s.k, s.n, s.q); });
        j["t_block"] = block_value ? block_value->str() : "cap";
        lines.push_back("t_block=" + (block_value ? big_text(*block_value) : std::string("(exceeds bit cap)")));
        if (s.k >= 2 && s.n >= 1) {
            try {
                const auto c = compare_block_bound(s.k, s.n, s.q);
                j["block_bound"] = comparison_json(c);
                lines.push_back(describe("t_block", c));
            } catch (const CapExceeded& e) {
                j["block_bound"] = "cap";
                lines.push_back(std::string("block bound: ") + e.what());
            }
        }
    }
    if (json)
        out << j.dump() << '\n';
    else
        for (const auto& line : lines) out << line << '\n';
    return kOk;
}

inline int cmd_selftest(const Settings& s, std::ostream& out)
{
    const bool json = json_format(s);
    using acceptance::SuiteLevel;
    if (s.level != "quick" && s.level != "full") throw PreconditionError("--level is quick or full");
    const SuiteLevel level = s.level == "full" ? SuiteLevel::Full : SuiteLevel::Quick;
    auto emit = [&](const acceptance::Outcome& o) {
        if (json) {
            nlohmann::ordered_json j;
            j["criterion"] = o.id;
            j["title"] = o.title;
            j["pass"] = o.pass;
            j["detail"] = o.detail;
            if (s.timing) j["seconds"] = o.seconds;
            out << j.dump() << std::endl;
        } else {
            out << acceptance::format_line(o) << std::endl;
        }
    };
    std::vector<acceptance::Outcome> results;
    if (s.criterion == 0) {
        results = acceptance::run_all(level, s.seed, emit);
    } else {
        using acceptance::Outcome;
        Outcome o;
        switch (s.criterion) {
        case 1: o = acceptance::bound_tables(); break;
        case 2: o = acceptance::enumeration_counts(); break;
        case 3: o = acceptance::axiom_suites(); break;
        case 4: o = acceptance::completeness(level, s.seed); break;
        case 5: o = acceptance::differential_algorithms(level, s.seed); break;
        case 6: o = acceptance::realization_round_trip(); break;
        case 7: o = acceptance::defining_formulas(s.seed); break;
        case 8: o = acceptance::transfer(s.seed); break;
        case 9: o = acceptance::quantifier_elimination(s.seed); break;
        default: throw PreconditionError("--criterion is between 1 and 9");
        }
        emit(o);
        results.push_back(o);
    }
    const bool all = std::all_of(results.begin(), results.end(), [](const auto& o) { return o.pass; });
    if (!json) out << (all ? "all criteria passed" : "some criteria failed") << '\n';
    return all ? kOk : kFailed;
}

} // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    detail::Settings s;
    CLI::App app{"Decision procedure for the theory of hereditarily finite sets of bounded size", "hk"};
    app.require_subcommand(1);

    auto add_k = [&](CLI::App* sub) { sub->add_option("--k", s.k, "bound on set size")->required(); };
    auto add_formula = [&](CLI::App* sub) {
        auto* text = sub->add_option("formula", s.formula, "formula text");
        auto* file = sub->add_option("--file", s.file, "read the formula from a file");
        text->excludes(file);
        file->excludes(text);
    };
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", s.format, "text, kv or json")->check(CLI::IsMember({"text", "kv", "json"}));
    };
    auto add_caps = [&](CLI::App* sub) {
        sub->add_option("--max-nodes", s.max_nodes, "largest structure the search may build");
        sub->add_option("--max-classes", s.max_classes, "most classes one enumeration may produce");
    };
    auto add_search = [&](CLI::App* sub) {
        add_caps(sub);
        sub->add_option("--timeout", s.timeout, "wall-clock limit in seconds");
        sub->add_option("--unsound-m", s.unsound_m, "experimental: use this level instead of the required one");
        sub->add_flag("--trace", s.trace, "stream search events to stderr");
        sub->add_option("--jobs", s.jobs, "threads for the top-level scan");
        sub->add_flag("--no-cache", s.no_cache, "disable memoization");
    };

    auto* decide_cmd = app.add_subcommand("decide", "decide a sentence");
    add_k(decide_cmd);
    add_formula(decide_cmd);
    add_format(decide_cmd);
    add_search(decide_cmd);
    decide_cmd->add_option("--algo", s.algo, "block, rank or k0")->check(CLI::IsMember({"block", "rank", "k0"}));
    decide_cmd->add_flag("--timing", s.timing, "report elapsed time");

    auto* enum_cmd = app.add_subcommand("enumerate", "list tcl-structures up to isomorphism");
    add_k(enum_cmd);
    enum_cmd->add_option("--m", s.m, "level")->required();
    enum_cmd->add_option("--l", s.l, "tuple length")->required();
    enum_cmd->add_flag("--count-only", s.count_only, "print only the number of classes");
    add_format(enum_cmd);
    add_caps(enum_cmd);

    auto* check_cmd = app.add_subcommand("check-structure", "validate a structure file");
    add_k(check_cmd);
    check_cmd->add_option("--m", s.m, "level")->required();
    check_cmd->add_option("--file", s.file, "structure file")->required();
    add_format(check_cmd);

    auto* qe_cmd = app.add_subcommand("qe", "eliminate unbounded quantifiers");
    add_k(qe_cmd);
    add_formula(qe_cmd);
    add_format(qe_cmd);
    add_search(qe_cmd);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a formula on concrete sets");
    add_k(eval_cmd);
    add_formula(eval_cmd);
    eval_cmd->add_option("--assign", s.assignment, "assignment such as \"x={{}};y={}\"");
    add_format(eval_cmd);
    add_search(eval_cmd);

    auto* bounds_cmd = app.add_subcommand("bounds", "bound recurrences and tower comparisons");
    add_k(bounds_cmd);
    bounds_cmd->add_option("--n", s.n, "rank or number of blocks")->required();
    bounds_cmd->add_option("--q", s.q, "block length");
    add_format(bounds_cmd);

    auto* self_cmd = app.add_subcommand("selftest", "run the acceptance checks");
    self_cmd->add_option("--level", s.level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    self_cmd->add_option("--seed", s.seed, "seed for random corpora");
    self_cmd->add_option("--criterion", s.criterion, "run a single criterion (1-9)");
    self_cmd->add_flag("--timing", s.timing, "include seconds in json output");
    add_format(self_cmd);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (decide_cmd->parsed()) return detail::cmd_decide(s, out, err);
        if (enum_cmd->parsed()) return detail::cmd_enumerate(s, out);
        if (check_cmd->parsed()) return detail::cmd_check_structure(s, out);
        if (qe_cmd->parsed()) return detail::cmd_qe(s, out, err);
        if (eval_cmd->parsed()) return detail::cmd_eval(s, out, err);
        if (bounds_cmd->parsed()) return detail::cmd_bounds(s, out);
        if (self_cmd->parsed()) return detail::cmd_selftest(s, out);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kUsage;
    } catch (const MalformedStructure& e) {
        err << "malformed structure: " << e.what() << '\n';
        return kUsage;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const IncompleteDecision& e) {
        err << "incomplete: " << e.what() << '\n';
        return kIncomplete;
    } catch (const CapExceeded& e) {
        err << "cap exceeded: " << e.what() << '\n';
        return kIncomplete;
    } catch (const Timeout& e) {
        err << "timeout: " << e.what() << '\n';
        return kIncomplete;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace hk::cli
