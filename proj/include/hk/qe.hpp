#pragma once

// Diagram formulas of tcl-structures and quantifier elimination into
// Boolean combinations of bounded existential formulas.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "hk/bounds.hpp"
#include "hk/canonical.hpp"
#include "hk/decide.hpp"
#include "hk/extensions.hpp"
#include "hk/formula.hpp"
#include "hk/structure.hpp"

namespace hk {

inline std::vector<std::string> default_tuple_names(std::size_t l)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < l; ++i) out.push_back("x" + std::to_string(i));
    return out;
}

/// Bounded existential formula satisfied by (B, b) exactly when s embeds
/// into the level closure of b. Non-tuple nodes are introduced in
/// breadth-first order, each bounded by a node discovered before it.
inline Formula characteristic_formula(const Structure& s, const std::vector<std::string>& names)
{
    const std::size_t l = s.arity();
    if (names.size() != l) throw PreconditionError("characteristic_formula: one name per tuple position");
    std::vector<NodeIndex> node_of; // variable -> node
    std::vector<std::string> var;
    std::vector<std::size_t> parent;
    std::vector<long> var_of(s.size(), -1);
    for (std::size_t i = 0; i < l; ++i) {
        node_of.push_back(s.tuple()[i]);
        var.push_back(names[i]);
        parent.push_back(i);
        if (var_of[s.tuple()[i]] < 0) var_of[s.tuple()[i]] = static_cast<long>(i);
    }
    std::set<std::string> taken(names.begin(), names.end());
    detail::NameSupply supply(taken, taken);
    for (std::size_t i = 0; i < node_of.size(); ++i) {
        for (NodeIndex c : s.children(node_of[i])) {
            if (var_of[c] >= 0) continue;
            var_of[c] = static_cast<long>(node_of.size());
            node_of.push_back(c);
            var.push_back(supply.claim("x" + std::to_string(node_of.size() - 1)));
            parent.push_back(i);
        }
    }
    if (std::count(var_of.begin(), var_of.end(), -1) != 0)
        throw PreconditionError("characteristic_formula: some node is unreachable from the tuple");

    std::vector<Formula> lits;
    const std::size_t n = node_of.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Formula a = Formula::member(var[i], var[j]);
            lits.push_back(s.has_edge(node_of[j], node_of[i]) ? a : Formula::negation(a));
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            Formula a = Formula::equal(var[i], var[j]);
            lits.push_back(node_of[i] == node_of[j] ? a : Formula::negation(a));
        }
    Formula f = conj_all(lits);
    for (std::size_t i = n; i-- > l;) f = Formula::bounded_exists(var[i], var[parent[i]], f);
    return f;
}

inline Formula characteristic_formula(const Structure& s)
{
    return characteristic_formula(s, default_tuple_names(s.arity()));
}

/// psi(s) and not psi(M) for every class M (from `classes`) that does not
/// embed into s. With classes = enumerate(k, n, l) this defines the ~_n
/// class of s.
inline Formula defining_formula(const Structure& s, const std::vector<Canonical>& classes,
                                const std::vector<std::string>& names)
{
    std::vector<Formula> negative;
    for (const auto& c : classes)
        if (!embeds(c.structure, s)) negative.push_back(characteristic_formula(c.structure, names));
    Formula psi = characteristic_formula(s, names);
    if (negative.empty()) return psi;
    return Formula::conj(psi, Formula::negation(disj_all(negative)));
}

inline Formula defining_formula(const Structure& s, std::size_t k, Level n, const std::vector<std::string>& names,
                                EnumerationCaps caps = {})
{
    return defining_formula(s, enumerate(k, n, s.arity(), caps), names);
}

inline Formula defining_formula(const Structure& s, std::size_t k, Level n, EnumerationCaps caps = {})
{
    return defining_formula(s, k, n, default_tuple_names(s.arity()), caps);
}

/// Equivalent (in S_k) Boolean combination of bounded existential
/// formulas: the disjunction of the defining formulas of the classes at
/// level t_k(rank f) that satisfy f. Quantifier-free input is returned as is.
inline Formula quantifier_eliminate(std::size_t k, const Formula& f, const DecideOptions& opts = {})
{
    const Formula g = desugar_bounded(f);
    if (is_quantifier_free(g)) return f;
    const auto vars = free_variables(g);
    const Level n = saturate_level(t_rank(k, rank(g)));
    const auto classes = enumerate(k, n, vars.size(), opts.caps);
    std::vector<Formula> disjuncts;
    for (const auto& c : classes)
        if (sksat(c.structure, n, g, k, opts)) disjuncts.push_back(defining_formula(c.structure, classes, vars));
    return disj_all(disjuncts);
}

/// No quantifier other than a bounded existential one.
inline bool is_bounded_existential_combination(const Formula& f)
{
    switch (f.kind()) {
    case FormulaKind::Exists:
    case FormulaKind::Forall:
    case FormulaKind::BoundedForall: return false;
    case FormulaKind::BoundedExists: return is_bounded_existential_combination(f.body());
    case FormulaKind::Not: return is_bounded_existential_combination(f.body());
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
    case FormulaKind::Iff: return is_bounded_existential_combination(f.lhs()) && is_bounded_existential_combination(f.rhs());
    default: return true;
    }
}

} // namespace hk
