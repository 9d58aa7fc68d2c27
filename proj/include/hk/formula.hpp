#pragma once

// First-order formulas over {in, =}: AST, parser, renderer, and the
// normalizations the deciders consume (bounded-quantifier expansion,
// quantifier rank, prenex form with alternation profile).

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hk/error.hpp"

namespace hk {

enum class FormulaKind : std::uint8_t {
    Member,        // a in b
    Equal,         // a = b
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Exists,        // exists var. body
    Forall,
    BoundedExists, // exists var in bound. body
    BoundedForall,
};

class Formula {
public:
    struct Node {
        FormulaKind kind;
        std::string var;   // atom lhs, or quantified variable
        std::string other; // atom rhs, or bounding variable
        std::shared_ptr<const Node> lhs; // Not / binary lhs / quantifier body
        std::shared_ptr<const Node> rhs;
    };

    Formula() = default;

    static Formula member(std::string x, std::string y) { return make(FormulaKind::Member, std::move(x), std::move(y)); }
    static Formula equal(std::string x, std::string y) { return make(FormulaKind::Equal, std::move(x), std::move(y)); }
    static Formula truth(bool value) { return make(value ? FormulaKind::True : FormulaKind::False, {}, {}); }
    static Formula negation(Formula f) { return make(FormulaKind::Not, {}, {}, std::move(f)); }
    static Formula conj(Formula a, Formula b) { return make(FormulaKind::And, {}, {}, std::move(a), std::move(b)); }
    static Formula disj(Formula a, Formula b) { return make(FormulaKind::Or, {}, {}, std::move(a), std::move(b)); }
    static Formula implies(Formula a, Formula b) { return make(FormulaKind::Implies, {}, {}, std::move(a), std::move(b)); }
    static Formula iff(Formula a, Formula b) { return make(FormulaKind::Iff, {}, {}, std::move(a), std::move(b)); }
    static Formula exists(std::string x, Formula body) { return make(FormulaKind::Exists, std::move(x), {}, std::move(body)); }
    static Formula forall(std::string x, Formula body) { return make(FormulaKind::Forall, std::move(x), {}, std::move(body)); }

    static Formula bounded_exists(std::string x, std::string bound, Formula body)
    {
        check_bounded(x, bound);
        return make(FormulaKind::BoundedExists, std::move(x), std::move(bound), std::move(body));
    }

    static Formula bounded_forall(std::string x, std::string bound, Formula body)
    {
        check_bounded(x, bound);
        return make(FormulaKind::BoundedForall, std::move(x), std::move(bound), std::move(body));
    }

    explicit operator bool() const noexcept { return node_ != nullptr; }

    FormulaKind kind() const { return node_->kind; }
    const std::string& var() const { return node_->var; }
    const std::string& other() const { return node_->other; }
    Formula lhs() const { return Formula(node_->lhs); }
    Formula rhs() const { return Formula(node_->rhs); }
    Formula body() const { return Formula(node_->lhs); }

    bool is_atom() const { return kind() == FormulaKind::Member || kind() == FormulaKind::Equal; }
    bool is_constant() const { return kind() == FormulaKind::True || kind() == FormulaKind::False; }
    bool is_binary() const
    {
        return kind() == FormulaKind::And || kind() == FormulaKind::Or || kind() == FormulaKind::Implies ||
               kind() == FormulaKind::Iff;
    }
    bool is_quantifier() const
    {
        return kind() == FormulaKind::Exists || kind() == FormulaKind::Forall ||
               kind() == FormulaKind::BoundedExists || kind() == FormulaKind::BoundedForall;
    }
    bool is_bounded_quantifier() const
    {
        return kind() == FormulaKind::BoundedExists || kind() == FormulaKind::BoundedForall;
    }

    /// Node identity, used for memoization keys.
    const void* id() const noexcept { return node_.get(); }

    friend bool operator==(const Formula& a, const Formula& b)
    {
        if (a.node_ == b.node_) return true;
        if (!a.node_ || !b.node_) return false;
        const Node& x = *a.node_;
        const Node& y = *b.node_;
        return x.kind == y.kind && x.var == y.var && x.other == y.other && Formula(x.lhs) == Formula(y.lhs) &&
               Formula(x.rhs) == Formula(y.rhs);
    }

private:
    explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    static void check_bounded(const std::string& x, const std::string& bound)
    {
        if (x == bound) throw PreconditionError("bounded quantifier variable '" + x + "' must differ from its bound");
    }

    static Formula make(FormulaKind kind, std::string var, std::string other, Formula lhs = {}, Formula rhs = {})
    {
        Formula f;
        f.node_ = std::make_shared<const Node>(
            Node{kind, std::move(var), std::move(other), std::move(lhs.node_), std::move(rhs.node_)});
        return f;
    }

    std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline const char* binary_symbol(FormulaKind k)
{
    switch (k) {
    case FormulaKind::And: return " & ";
    case FormulaKind::Or: return " | ";
    case FormulaKind::Implies: return " -> ";
    case FormulaKind::Iff: return " <-> ";
    default: return " ? ";
    }
}

inline void render_into(const Formula& f, std::string& out);

inline void render_operand(const Formula& f, std::string& out)
{
    if (f.is_quantifier()) {
        out += '(';
        render_into(f, out);
        out += ')';
    } else {
        render_into(f, out);
    }
}

inline void render_into(const Formula& f, std::string& out)
{
    switch (f.kind()) {
    case FormulaKind::Member:
        out += f.var();
        out += " in ";
        out += f.other();
        return;
    case FormulaKind::Equal:
        out += f.var();
        out += " = ";
        out += f.other();
        return;
    case FormulaKind::True: out += "true"; return;
    case FormulaKind::False: out += "false"; return;
    case FormulaKind::Not:
        out += '!';
        if (f.body().is_binary()) {
            render_into(f.body(), out);
        } else {
            out += '(';
            render_into(f.body(), out);
            out += ')';
        }
        return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
    case FormulaKind::Iff:
        out += '(';
        render_operand(f.lhs(), out);
        out += binary_symbol(f.kind());
        render_operand(f.rhs(), out);
        out += ')';
        return;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
    case FormulaKind::BoundedExists:
    case FormulaKind::BoundedForall: {
        const bool ex = f.kind() == FormulaKind::Exists || f.kind() == FormulaKind::BoundedExists;
        out += ex ? "exists " : "forall ";
        out += f.var();
        if (f.is_bounded_quantifier()) {
            out += " in ";
            out += f.other();
        }
        out += ". ";
        render_into(f.body(), out);
        return;
    }
    }
}

} // namespace detail

/// Fully parenthesized text; parse(render(f)) == f.
inline std::string render(const Formula& f)
{
    std::string out;
    detail::render_into(f, out);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

enum class Tok : std::uint8_t { Ident, Exists, Forall, In, True, False, Not, And, Or, Implies, Iff, LParen, RParen, Dot, Comma, Eq, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

inline std::vector<Token> tokenize(std::string_view src)
{
    std::vector<Token> toks;
    std::size_t line = 1, col = 1, i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t j = 0; j < n; ++j) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        const std::size_t l0 = line, c0 = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            std::string word(src.substr(i, j - i));
            Tok kind = Tok::Ident;
            if (word == "exists") kind = Tok::Exists;
            else if (word == "forall") kind = Tok::Forall;
            else if (word == "in") kind = Tok::In;
            else if (word == "true") kind = Tok::True;
            else if (word == "false") kind = Tok::False;
            toks.push_back({kind, std::move(word), l0, c0});
            advance(j - i);
            continue;
        }
        if (src.substr(i, 3) == "<->") {
            toks.push_back({Tok::Iff, "<->", l0, c0});
            advance(3);
            continue;
        }
        if (src.substr(i, 2) == "->") {
            toks.push_back({Tok::Implies, "->", l0, c0});
            advance(2);
            continue;
        }
        Tok kind;
        switch (c) {
        case '!': kind = Tok::Not; break;
        case '&': kind = Tok::And; break;
        case '|': kind = Tok::Or; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '.': kind = Tok::Dot; break;
        case ',': kind = Tok::Comma; break;
        case '=': kind = Tok::Eq; break;
        default: throw ParseError(std::string("unexpected character '") + c + "'", l0, c0);
        }
        toks.push_back({kind, std::string(1, c), l0, c0});
        advance(1);
    }
    toks.push_back({Tok::End, "", line, col});
    return toks;
}

class FormulaParser {
public:
    explicit FormulaParser(std::string_view src) : toks_(tokenize(src)) {}

    Formula parse_all()
    {
        Formula f = parse_iff();
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
        return f;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }
    bool accept(Tok k)
    {
        if (peek().kind != k) return false;
        ++pos_;
        return true;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        const Token& t = peek();
        throw ParseError(t.kind == Tok::End ? what + " (at end of input)" : what, t.line, t.column);
    }

    std::string expect_var(const char* context)
    {
        if (peek().kind != Tok::Ident) fail(std::string("expected variable ") + context);
        return take().text;
    }

    Formula parse_iff()
    {
        Formula f = parse_imp();
        while (accept(Tok::Iff)) f = Formula::iff(f, parse_imp());
        return f;
    }

    Formula parse_imp()
    {
        Formula f = parse_or();
        if (accept(Tok::Implies)) return Formula::implies(f, parse_imp());
        return f;
    }

    Formula parse_or()
    {
        Formula f = parse_and();
        while (accept(Tok::Or)) f = Formula::disj(f, parse_and());
        return f;
    }

    Formula parse_and()
    {
        Formula f = parse_unary();
        while (accept(Tok::And)) f = Formula::conj(f, parse_unary());
        return f;
    }

    Formula parse_unary()
    {
        switch (peek().kind) {
        case Tok::Not: take(); return Formula::negation(parse_unary());
        case Tok::True: take(); return Formula::truth(true);
        case Tok::False: take(); return Formula::truth(false);
        case Tok::LParen: {
            take();
            Formula f = parse_iff();
            if (!accept(Tok::RParen)) fail("expected ')'");
            return f;
        }
        case Tok::Exists:
        case Tok::Forall: return parse_quant();
        case Tok::Ident: {
            std::string lhs = take().text;
            if (accept(Tok::In)) return Formula::member(std::move(lhs), expect_var("after 'in'"));
            if (accept(Tok::Eq)) return Formula::equal(std::move(lhs), expect_var("after '='"));
            fail("expected 'in' or '=' after variable '" + lhs + "'");
        }
        default: fail("expected a formula");
        }
    }

    Formula parse_quant()
    {
        const bool ex = take().kind == Tok::Exists;
        std::vector<std::string> vars;
        vars.push_back(expect_var("after quantifier"));
        while (accept(Tok::Comma)) vars.push_back(expect_var("after ','"));
        std::optional<std::string> bound;
        if (peek().kind == Tok::In) {
            if (vars.size() != 1) fail("bounded quantifier takes a single variable");
            take();
            bound = expect_var("after 'in'");
            if (*bound == vars.front()) fail("bounded quantifier variable must differ from its bound");
        }
        if (!accept(Tok::Dot)) fail("expected '.' after quantifier prefix");
        Formula body = parse_iff();
        if (bound)
            return ex ? Formula::bounded_exists(vars.front(), *bound, body)
                      : Formula::bounded_forall(vars.front(), *bound, body);
        for (auto it = vars.rbegin(); it != vars.rend(); ++it)
            body = ex ? Formula::exists(*it, body) : Formula::forall(*it, body);
        return body;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Formula parse_formula(std::string_view text) { return detail::FormulaParser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Measures

namespace detail {

inline void collect_free(const Formula& f, std::vector<std::string>& bound, std::vector<std::string>& out,
                         std::unordered_set<std::string>& seen)
{
    auto note = [&](const std::string& v) {
        if (std::find(bound.begin(), bound.end(), v) != bound.end()) return;
        if (seen.insert(v).second) out.push_back(v);
    };
    switch (f.kind()) {
    case FormulaKind::Member:
    case FormulaKind::Equal:
        note(f.var());
        note(f.other());
        return;
    case FormulaKind::True:
    case FormulaKind::False: return;
    case FormulaKind::Not: collect_free(f.body(), bound, out, seen); return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
    case FormulaKind::Iff:
        collect_free(f.lhs(), bound, out, seen);
        collect_free(f.rhs(), bound, out, seen);
        return;
    case FormulaKind::BoundedExists:
    case FormulaKind::BoundedForall:
        note(f.other());
        [[fallthrough]];
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        bound.push_back(f.var());
        collect_free(f.body(), bound, out, seen);
        bound.pop_back();
        return;
    }
}

} // namespace detail

/// Free variables in order of first occurrence (left to right).
inline std::vector<std::string> free_variables(const Formula& f)
{
    std::vector<std::string> bound, out;
    std::unordered_set<std::string> seen;
    detail::collect_free(f, bound, out, seen);
    return out;
}

inline bool is_sentence(const Formula& f) { return free_variables(f).empty(); }

inline bool occurs_free(const Formula& f, const std::string& v)
{
    const auto fv = free_variables(f);
    return std::find(fv.begin(), fv.end(), v) != fv.end();
}

/// Quantifier rank; a bounded quantifier counts once.
inline std::size_t rank(const Formula& f)
{
    if (f.is_atom() || f.is_constant()) return 0;
    if (f.kind() == FormulaKind::Not) return rank(f.body());
    if (f.is_binary()) return std::max(rank(f.lhs()), rank(f.rhs()));
    return rank(f.body()) + 1;
}

/// Number of quantifier nodes.
inline std::size_t quantifier_count(const Formula& f)
{
    if (f.is_atom() || f.is_constant()) return 0;
    if (f.kind() == FormulaKind::Not) return quantifier_count(f.body());
    if (f.is_binary()) return quantifier_count(f.lhs()) + quantifier_count(f.rhs());
    return quantifier_count(f.body()) + 1;
}

inline bool is_quantifier_free(const Formula& f) { return quantifier_count(f) == 0; }

/// Built from atoms, connectives, and bounded quantifiers only.
inline bool is_bounded(const Formula& f)
{
    if (f.is_atom() || f.is_constant()) return true;
    if (f.kind() == FormulaKind::Not) return is_bounded(f.body());
    if (f.is_binary()) return is_bounded(f.lhs()) && is_bounded(f.rhs());
    return f.is_bounded_quantifier() && is_bounded(f.body());
}

inline bool has_bounded_quantifiers(const Formula& f)
{
    if (f.is_atom() || f.is_constant()) return false;
    if (f.kind() == FormulaKind::Not) return has_bounded_quantifiers(f.body());
    if (f.is_binary()) return has_bounded_quantifiers(f.lhs()) || has_bounded_quantifiers(f.rhs());
    return f.is_bounded_quantifier() || has_bounded_quantifiers(f.body());
}

// ---------------------------------------------------------------------------
// Normalizations

/// exists y in x. p  ~>  exists y. (y in x & p);  forall y in x. p  ~>  forall y. (y in x -> p)
inline Formula desugar_bounded(const Formula& f)
{
    switch (f.kind()) {
    case FormulaKind::Member:
    case FormulaKind::Equal:
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Not: return Formula::negation(desugar_bounded(f.body()));
    case FormulaKind::And: return Formula::conj(desugar_bounded(f.lhs()), desugar_bounded(f.rhs()));
    case FormulaKind::Or: return Formula::disj(desugar_bounded(f.lhs()), desugar_bounded(f.rhs()));
    case FormulaKind::Implies: return Formula::implies(desugar_bounded(f.lhs()), desugar_bounded(f.rhs()));
    case FormulaKind::Iff: return Formula::iff(desugar_bounded(f.lhs()), desugar_bounded(f.rhs()));
    case FormulaKind::Exists: return Formula::exists(f.var(), desugar_bounded(f.body()));
    case FormulaKind::Forall: return Formula::forall(f.var(), desugar_bounded(f.body()));
    case FormulaKind::BoundedExists:
        return Formula::exists(f.var(), Formula::conj(Formula::member(f.var(), f.other()), desugar_bounded(f.body())));
    case FormulaKind::BoundedForall:
        return Formula::forall(f.var(), Formula::implies(Formula::member(f.var(), f.other()), desugar_bounded(f.body())));
    }
    return f;
}

/// Drops quantifiers whose variable does not occur free in their body.
inline Formula remove_dummy_quantifiers(const Formula& f)
{
    switch (f.kind()) {
    case FormulaKind::Member:
    case FormulaKind::Equal:
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Not: return Formula::negation(remove_dummy_quantifiers(f.body()));
    case FormulaKind::And: return Formula::conj(remove_dummy_quantifiers(f.lhs()), remove_dummy_quantifiers(f.rhs()));
    case FormulaKind::Or: return Formula::disj(remove_dummy_quantifiers(f.lhs()), remove_dummy_quantifiers(f.rhs()));
    case FormulaKind::Implies:
        return Formula::implies(remove_dummy_quantifiers(f.lhs()), remove_dummy_quantifiers(f.rhs()));
    case FormulaKind::Iff: return Formula::iff(remove_dummy_quantifiers(f.lhs()), remove_dummy_quantifiers(f.rhs()));
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
        Formula body = remove_dummy_quantifiers(f.body());
        if (!occurs_free(body, f.var())) return body;
        return f.kind() == FormulaKind::Exists ? Formula::exists(f.var(), body) : Formula::forall(f.var(), body);
    }
    case FormulaKind::BoundedExists:
    case FormulaKind::BoundedForall: {
        // the bound atom mentions the variable, so a bounded quantifier is never dummy
        Formula body = remove_dummy_quantifiers(f.body());
        return f.kind() == FormulaKind::BoundedExists ? Formula::bounded_exists(f.var(), f.other(), body)
                                                      : Formula::bounded_forall(f.var(), f.other(), body);
    }
    }
    return f;
}

enum class Quantifier : std::uint8_t { Exists, Forall };

inline Quantifier dual(Quantifier q) { return q == Quantifier::Exists ? Quantifier::Forall : Quantifier::Exists; }

struct QuantifierBlock {
    Quantifier kind;
    std::vector<std::string> vars;

    friend bool operator==(const QuantifierBlock&, const QuantifierBlock&) = default;
};

struct AlternationProfile {
    std::size_t blocks = 0;    // r
    std::size_t max_block = 0; // q

    friend bool operator==(const AlternationProfile&, const AlternationProfile&) = default;
};

/// Alternating quantifier blocks over a quantifier-free matrix.
class PrenexFormula {
public:
    PrenexFormula(std::vector<QuantifierBlock> blocks, Formula matrix) : blocks_(std::move(blocks)), matrix_(std::move(matrix))
    {
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            if (blocks_[i].vars.empty()) throw PreconditionError("empty quantifier block");
            if (i > 0 && blocks_[i].kind == blocks_[i - 1].kind)
                throw PreconditionError("adjacent quantifier blocks must alternate");
        }
        if (!is_quantifier_free(matrix_)) throw PreconditionError("prenex matrix must be quantifier-free");
    }

    const std::vector<QuantifierBlock>& blocks() const { return blocks_; }
    const Formula& matrix() const { return matrix_; }

    AlternationProfile profile() const
    {
        AlternationProfile p;
        p.blocks = blocks_.size();
        for (const auto& b : blocks_) p.max_block = std::max(p.max_block, b.vars.size());
        return p;
    }

    std::size_t quantifier_count() const
    {
        std::size_t n = 0;
        for (const auto& b : blocks_) n += b.vars.size();
        return n;
    }

    Formula as_formula() const
    {
        Formula f = matrix_;
        for (auto b = blocks_.rbegin(); b != blocks_.rend(); ++b)
            for (auto v = b->vars.rbegin(); v != b->vars.rend(); ++v)
                f = b->kind == Quantifier::Exists ? Formula::exists(*v, f) : Formula::forall(*v, f);
        return f;
    }

private:
    std::vector<QuantifierBlock> blocks_;
    Formula matrix_;
};

inline AlternationProfile alternation_profile(const PrenexFormula& p) { return p.profile(); }

namespace detail {

/// Expands every <-> that has a quantifier below it into two implications.
inline Formula expand_quantified_iff(const Formula& f)
{
    switch (f.kind()) {
    case FormulaKind::Member:
    case FormulaKind::Equal:
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Not: return Formula::negation(expand_quantified_iff(f.body()));
    case FormulaKind::And: return Formula::conj(expand_quantified_iff(f.lhs()), expand_quantified_iff(f.rhs()));
    case FormulaKind::Or: return Formula::disj(expand_quantified_iff(f.lhs()), expand_quantified_iff(f.rhs()));
    case FormulaKind::Implies: return Formula::implies(expand_quantified_iff(f.lhs()), expand_quantified_iff(f.rhs()));
    case FormulaKind::Iff: {
        Formula a = expand_quantified_iff(f.lhs());
        Formula b = expand_quantified_iff(f.rhs());
        if (is_quantifier_free(a) && is_quantifier_free(b)) return Formula::iff(a, b);
        return Formula::conj(Formula::implies(a, b), Formula::implies(b, a));
    }
    case FormulaKind::Exists: return Formula::exists(f.var(), expand_quantified_iff(f.body()));
    case FormulaKind::Forall: return Formula::forall(f.var(), expand_quantified_iff(f.body()));
    default: throw PreconditionError("expand_quantified_iff expects a desugared formula");
    }
}

class NameSupply {
public:
    /// `taken` names may not be claimed again; `reserved` names are only
    /// avoided when inventing a suffixed name.
    NameSupply(std::set<std::string> taken, std::set<std::string> reserved)
        : taken_(std::move(taken)), reserved_(std::move(reserved))
    {
    }

    /// `base` if not yet taken, else base + smallest unused numeric suffix.
    std::string claim(const std::string& base)
    {
        if (taken_.insert(base).second) return base;
        for (std::size_t i = 1;; ++i) {
            std::string candidate = base + std::to_string(i);
            if (reserved_.count(candidate)) continue;
            if (taken_.insert(candidate).second) return candidate;
        }
    }

private:
    std::set<std::string> taken_;
    std::set<std::string> reserved_;
};

inline Formula substitute_free(const Formula& f, const std::string& from, const std::string& to);

/// Gives every quantifier its own variable, distinct from free variables.
inline Formula rename_apart(const Formula& f, NameSupply& names)
{
    switch (f.kind()) {
    case FormulaKind::Member:
    case FormulaKind::Equal:
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Not: return Formula::negation(rename_apart(f.body(), names));
    case FormulaKind::And: {
        Formula a = rename_apart(f.lhs(), names);
        return Formula::conj(a, rename_apart(f.rhs(), names));
    }
    case FormulaKind::Or: {
        Formula a = rename_apart(f.lhs(), names);
        return Formula::disj(a, rename_apart(f.rhs(), names));
    }
    case FormulaKind::Implies: {
        Formula a = rename_apart(f.lhs(), names);
        return Formula::implies(a, rename_apart(f.rhs(), names));
    }
    case FormulaKind::Iff: {
        Formula a = rename_apart(f.lhs(), names);
        return Formula::iff(a, rename_apart(f.rhs(), names));
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
        const std::string fresh = names.claim(f.var());
        Formula body = f.body();
        if (fresh != f.var()) body = substitute_free(body, f.var(), fresh);
        body = rename_apart(body, names);
        return f.kind() == FormulaKind::Exists ? Formula::exists(fresh, body) : Formula::forall(fresh, body);
    }
    default: throw PreconditionError("rename_apart expects a desugared formula");
    }
}

inline Formula substitute_free(const Formula& f, const std::string& from, const std::string& to)
{
    auto sub = [&](const std::string& v) { return v == from ? to : v; };
    switch (f.kind()) {
    case FormulaKind::Member: return Formula::member(sub(f.var()), sub(f.other()));
    case FormulaKind::Equal: return Formula::equal(sub(f.var()), sub(f.other()));
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Not: return Formula::negation(substitute_free(f.body(), from, to));
    case FormulaKind::And: return Formula::conj(substitute_free(f.lhs(), from, to), substitute_free(f.rhs(), from, to));
    case FormulaKind::Or: return Formula::disj(substitute_free(f.lhs(), from, to), substitute_free(f.rhs(), from, to));
    case FormulaKind::Implies:
        return Formula::implies(substitute_free(f.lhs(), from, to), substitute_free(f.rhs(), from, to));
    case FormulaKind::Iff: return Formula::iff(substitute_free(f.lhs(), from, to), substitute_free(f.rhs(), from, to));
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        if (f.var() == from) return f;
        // `to` is always fresh here, so no capture is possible
        return f.kind() == FormulaKind::Exists ? Formula::exists(f.var(), substitute_free(f.body(), from, to))
                                               : Formula::forall(f.var(), substitute_free(f.body(), from, to));
    case FormulaKind::BoundedExists:
    case FormulaKind::BoundedForall: {
        const std::string bound = sub(f.other());
        if (f.var() == from)
            return f.kind() == FormulaKind::BoundedExists ? Formula::bounded_exists(f.var(), bound, f.body())
                                                          : Formula::bounded_forall(f.var(), bound, f.body());
        Formula body = substitute_free(f.body(), from, to);
        return f.kind() == FormulaKind::BoundedExists ? Formula::bounded_exists(f.var(), bound, body)
                                                      : Formula::bounded_forall(f.var(), bound, body);
    }
    }
    return f;
}

inline void all_variable_names(const Formula& f, std::set<std::string>& out)
{
    if (f.is_constant()) return;
    if (!f.var().empty()) out.insert(f.var());
    if (!f.other().empty()) out.insert(f.other());
    if (f.lhs()) all_variable_names(f.lhs(), out);
    if (f.rhs()) all_variable_names(f.rhs(), out);
}

using Prefix = std::vector<std::pair<Quantifier, std::string>>;

inline Prefix flip(Prefix p)
{
    for (auto& [q, v] : p) q = dual(q);
    return p;
}

/// Pulls quantifiers out left to right; input is renamed apart and free of quantified <->.
inline std::pair<Prefix, Formula> pull_quantifiers(const Formula& f)
{
    switch (f.kind()) {
    case FormulaKind::Member:
    case FormulaKind::Equal:
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Iff: return {{}, f};
    case FormulaKind::Not: {
        auto [p, m] = pull_quantifiers(f.body());
        return {flip(std::move(p)), Formula::negation(m)};
    }
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies: {
        auto [pa, ma] = pull_quantifiers(f.lhs());
        auto [pb, mb] = pull_quantifiers(f.rhs());
        Prefix p = f.kind() == FormulaKind::Implies ? flip(std::move(pa)) : std::move(pa);
        p.insert(p.end(), pb.begin(), pb.end());
        Formula m = f.kind() == FormulaKind::And ? Formula::conj(ma, mb)
                  : f.kind() == FormulaKind::Or  ? Formula::disj(ma, mb)
                                                 : Formula::implies(ma, mb);
        return {std::move(p), m};
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
        auto [p, m] = pull_quantifiers(f.body());
        p.insert(p.begin(), {f.kind() == FormulaKind::Exists ? Quantifier::Exists : Quantifier::Forall, f.var()});
        return {std::move(p), m};
    }
    default: throw PreconditionError("pull_quantifiers expects a desugared formula");
    }
}

} // namespace detail

/// Logically equivalent prenex form: bounded quantifiers expanded, dummy
/// quantifiers dropped, quantified <-> split into two implications, bound
/// variables renamed apart, and adjacent same-kind quantifiers merged.
inline PrenexFormula prenex(const Formula& input)
{
    Formula f = remove_dummy_quantifiers(desugar_bounded(input));
    f = detail::expand_quantified_iff(f);
    const auto fv = free_variables(f);
    std::set<std::string> reserved;
    detail::all_variable_names(f, reserved);
    detail::NameSupply names(std::set<std::string>(fv.begin(), fv.end()), std::move(reserved));
    f = detail::rename_apart(f, names);
    auto [prefix, matrix] = detail::pull_quantifiers(f);
    std::vector<QuantifierBlock> blocks;
    for (auto& [q, v] : prefix) {
        if (blocks.empty() || blocks.back().kind != q) blocks.push_back({q, {}});
        blocks.back().vars.push_back(v);
    }
    return PrenexFormula(std::move(blocks), matrix);
}

// ---------------------------------------------------------------------------
// Convenience

inline Formula conj_all(const std::vector<Formula>& parts)
{
    if (parts.empty()) return Formula::truth(true);
    Formula f = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) f = Formula::conj(f, parts[i]);
    return f;
}

inline Formula disj_all(const std::vector<Formula>& parts)
{
    if (parts.empty()) return Formula::truth(false);
    Formula f = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) f = Formula::disj(f, parts[i]);
    return f;
}

} // namespace hk
