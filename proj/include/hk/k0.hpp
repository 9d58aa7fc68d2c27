#pragma once

// S_0 has a single element, so quantifiers are vacuous: membership is
// false and equality true.

#include "hk/formula.hpp"

namespace hk {

inline bool eval_k0(const Formula& f)
{
    switch (f.kind()) {
    case FormulaKind::Member: return false;
    case FormulaKind::Equal: return true;
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Not: return !eval_k0(f.body());
    case FormulaKind::And: return eval_k0(f.lhs()) && eval_k0(f.rhs());
    case FormulaKind::Or: return eval_k0(f.lhs()) || eval_k0(f.rhs());
    case FormulaKind::Implies: return !eval_k0(f.lhs()) || eval_k0(f.rhs());
    case FormulaKind::Iff: return eval_k0(f.lhs()) == eval_k0(f.rhs());
    case FormulaKind::Exists:
    case FormulaKind::Forall: return eval_k0(f.body());
    // the range of a bounded quantifier is empty in the one-element model
    case FormulaKind::BoundedExists: return false;
    case FormulaKind::BoundedForall: return true;
    }
    return false;
}

} // namespace hk
