#include <gtest/gtest.h>

#include "hk/bounds.hpp"
#include "hk/decide.hpp"
#include "hk/hset.hpp"
#include "hk/oracle.hpp"
#include "hk/qe.hpp"

using namespace hk;

namespace {

Structure make(std::vector<std::string> nodes, std::vector<std::pair<std::string, std::string>> edges,
               std::vector<std::string> tuple)
{
    return Structure::from_names(nodes, edges, tuple);
}

BigNat big(const char* digits) { return BigNat(digits); }

} // namespace

// -- bound arithmetic -------------------------------------------------------

TEST(Bounds, GeometricSums)
{
    EXPECT_EQ(k_leq(2, 4), 31);
    for (std::uint64_t n = 0; n < 10; ++n) EXPECT_EQ(k_leq(1, n), n + 1);
    EXPECT_EQ(k_leq(0, 3), 1);
    EXPECT_EQ(k_leq(0, 0), 1);
    EXPECT_EQ(k_leq(3, 2), 13);
}

TEST(Bounds, RankRecurrence)
{
    for (std::uint64_t k = 0; k <= 10; ++k) EXPECT_EQ(t_rank(k, 1), k + 2);
    EXPECT_EQ(t_rank(1, 3), 21);
    EXPECT_EQ(t_rank(2, 2), 68);
    for (std::uint64_t n = 0; n <= 20; ++n)
        EXPECT_EQ(t_rank(1, n), BigNat{3} * ((BigNat{1} << static_cast<unsigned>(n)) - 1));
    for (std::uint64_t n = 0; n <= 5; ++n) EXPECT_EQ(t_rank(0, n), 2 * n);
    // 2^{<=69} + 68 + 1
    EXPECT_EQ(t_rank(2, 3), big("1180591620717411303492"));
}

TEST(Bounds, BlockRecurrence)
{
    EXPECT_EQ(t_block(2, 1, 4), 13);
    EXPECT_EQ(t_block(2, 1, 2), 7);
    EXPECT_EQ(t_block(2, 2, 2), 1030);
    for (std::uint64_t q = 0; q <= 4; ++q) EXPECT_EQ(t_block(2, 0, q), 0);
    for (std::uint64_t k = 0; k <= 3; ++k)
        for (std::uint64_t n = 0; n <= 3; ++n) EXPECT_EQ(t_block(k, n, 1), t_rank(k, n));
    for (std::uint64_t k = 2; k <= 3; ++k)
        for (std::uint64_t n = 1; n <= 2; ++n)
            for (std::uint64_t q = 1; q < 4; ++q) EXPECT_LE(t_block(k, n, q), t_block(k, n, q + 1));
}

// The recurrence at k = 1 gives t(r, q) = (2 + 1/q)((q+1)^r - 1).
TEST(Bounds, BlockRecurrenceClosedFormAtKOne)
{
    for (std::uint64_t q = 1; q <= 5; ++q)
        for (std::uint64_t r = 0; r <= 6; ++r) {
            BigNat p = 1;
            for (std::uint64_t i = 0; i < r; ++i) p *= q + 1;
            EXPECT_EQ(BigNat{q} * t_block(1, r, q), BigNat{2 * q + 1} * (p - 1)) << r << " " << q;
        }
}

TEST(Bounds, TowerComparisons)
{
    EXPECT_EQ(supexp(3, 1), 8);
    EXPECT_EQ(supexp(3, 0), 3);
    EXPECT_EQ(supexp(2, 2), 16);
    EXPECT_EQ(supexp(1, 3), 16);
    EXPECT_TRUE(leq_supexp(65536, 1, 4));
    EXPECT_FALSE(leq_supexp(65537, 1, 4));
    EXPECT_TRUE(leq_supexp(BigNat{1} << 100, 100, 1));
    EXPECT_FALSE(leq_supexp((BigNat{1} << 100) + 1, 100, 1));
    EXPECT_EQ(c_k(2), 7u);
    EXPECT_TRUE(bound_check(2, 2));
    const auto c = compare_rank_bound(2, 2);
    ASSERT_TRUE(c.value.has_value());
    EXPECT_EQ(*c.value, 68);
    EXPECT_EQ(c.exponent, 7u);
    EXPECT_EQ(c.height, 1u);
    EXPECT_TRUE(bound_check(2, 2, 2));
    EXPECT_EQ(*compare_block_bound(2, 2, 2).value, 1030);
    EXPECT_EQ(compare_block_bound(2, 2, 2).exponent, 16u);
}

TEST(Bounds, CheckHoldsOnTheWholeTable)
{
    for (std::uint64_t k = 2; k <= 4; ++k)
        for (std::uint64_t n = 1; n <= 3; ++n) {
            EXPECT_TRUE(bound_check(k, n)) << k << " " << n;
            for (std::uint64_t q = 1; q <= 4; ++q) EXPECT_TRUE(bound_check(k, n, q)) << k << " " << n << " " << q;
        }
}

TEST(Bounds, CapsAreReported)
{
    EXPECT_THROW(t_rank(3, 4), CapExceeded);
    EXPECT_THROW(supexp(100, 3), CapExceeded);
}

// -- structure evaluation ---------------------------------------------------

TEST(Sksat, Examples)
{
    EXPECT_FALSE(sksat(Structure{}, 4, parse_formula("exists x. x in x"), 2));
    EXPECT_TRUE(sksat(Structure{}, 9, parse_formula("exists y. forall t. !(t in y)"), 1));
    // free variables are taken in order of first occurrence: y, then x
    const Structure s = make({"a", "b"}, {{"a", "b"}}, {"b", "a"});
    EXPECT_TRUE(sksat(s, 0, parse_formula("x in y"), 1));
    EXPECT_TRUE(sksat(s, 0, parse_formula("y in x"), 1));
    EXPECT_FALSE(sksat(s, 0, parse_formula("y = y & x in y"), 1));
    EXPECT_FALSE(sksat(s, 0, parse_formula("x = y"), 1));
}

TEST(Sksat, Preconditions)
{
    EXPECT_THROW(sksat(Structure{}, 3, parse_formula("exists x. exists y. x in y"), 1), PreconditionError);
    EXPECT_THROW(sksat(Structure{}, 9, parse_formula("x in x"), 1), PreconditionError);
    EXPECT_THROW(sksat(make({"a"}, {{"a", "a"}}, {"a"}), 3, parse_formula("exists y. y in x"), 1), PreconditionError);
    DecideOptions unsound;
    unsound.unsound_m = 1;
    EXPECT_NO_THROW(sksat(Structure{}, 1, parse_formula("exists x. exists y. x in y"), 1, unsound));
}

TEST(Bsksat, Examples)
{
    const auto b2 = prenex(parse_formula(
        "forall x,u0,u1,u2. ((u0 in x & u1 in x & u2 in x) -> (u0=u1 | u0=u2 | u1=u2))"));
    EXPECT_TRUE(bsksat(Structure{}, 13, b2, 2));
    EXPECT_TRUE(bsksat(Structure{}, 5, prenex(parse_formula("exists x,y. x in y")), 1));
    EXPECT_TRUE(bsksat(Structure{}, 9, prenex(parse_formula("forall x. exists y. x in y")), 1));
    EXPECT_THROW(bsksat(Structure{}, 12, b2, 2), PreconditionError);
}

TEST(Sksat, AgreesWithBsksatOnStructures)
{
    // open formulas evaluated on every class at the required level
    const char* texts[] = {"exists y. y in x", "forall y. (y in x -> exists z. z in y)", "exists y. (x in y & !(y = x))"};
    for (const char* text : texts) {
        const Formula f = parse_formula(text);
        const auto p = prenex(f);
        const Level mr = saturate_level(t_rank(1, rank(f)));
        const auto prof = p.profile();
        const Level mb = saturate_level(t_block(1, prof.blocks, prof.max_block));
        const Level m = std::max(mr, mb);
        for (const auto& c : enumerate(1, m, 1))
            EXPECT_EQ(sksat(c.structure, m, f, 1), bsksat(c.structure, m, p, 1)) << text;
    }
}

// -- decide -----------------------------------------------------------------

TEST(Decide, Examples)
{
    EXPECT_FALSE(decide(0, "exists x, y. !(x = y)").value);
    EXPECT_TRUE(decide(1, "forall x. (!(x = x) | exists y. x in y)").value);
    EXPECT_FALSE(decide(2, "exists x0,x1. (x0 in x1 & x1 in x0)").value);
    EXPECT_TRUE(decide(1, "exists y. forall t. !(t in y)").value);
    EXPECT_TRUE(decide(1, "forall x. exists y. x in y").value);
}

TEST(Decide, EveryAlgorithmOnSmallSentences)
{
    const std::vector<std::pair<std::string, bool>> k1 = {
        {"exists x. x in x", false},
        {"exists x, y. x in y", true},
        {"forall x, y. (x in y -> !(y in x))", true},
        {"exists x, y, z. (x in z & y in z & !(x = y))", false},
        {"forall x. exists y. (x in y & !(y in x))", true},
        {"exists x. forall y. !(x in y)", false},
    };
    DecideOptions opts;
    for (auto algo : {Algorithm::Block, Algorithm::Rank}) {
        opts.algorithm = algo;
        for (const auto& [text, want] : k1) EXPECT_EQ(decide(1, text, opts).value, want) << text;
    }
    opts.algorithm = Algorithm::K0;
    EXPECT_TRUE(decide(0, "forall x, y. x = y", opts).value);
    EXPECT_THROW(decide(1, "true", opts), PreconditionError);
}

TEST(Decide, VerdictFields)
{
    const Verdict v = decide(1, "forall x. exists y. x in y");
    EXPECT_TRUE(v.value);
    EXPECT_EQ(v.algorithm, Algorithm::Block);
    EXPECT_EQ(v.m, t_block(1, 2, 1));
    EXPECT_EQ(v.structures, 22u);
    EXPECT_TRUE(v.sound);
    DecideOptions rank;
    rank.algorithm = Algorithm::Rank;
    EXPECT_EQ(decide(1, "forall x. exists y. x in y", rank).m, 9);
    EXPECT_THROW(decide(1, "x in x"), PreconditionError);
}

TEST(Decide, AtLeastNElements)
{
    for (std::size_t n = 1; n <= 3; ++n) EXPECT_TRUE(decide(1, at_least_sentence(n)).value) << n;
    EXPECT_FALSE(decide(0, at_least_sentence(2)).value);
    EXPECT_TRUE(decide(0, at_least_sentence(1)).value);
}

TEST(Decide, CacheDoesNotChangeValuesOrCounts)
{
    FormulaGenerator gen(99);
    for (int i = 0; i < 40; ++i) {
        const Formula f = gen.sentence(2, 3, 5);
        for (auto algo : {Algorithm::Block, Algorithm::Rank}) {
            DecideOptions on, off;
            on.algorithm = off.algorithm = algo;
            on.caps.max_nodes = off.caps.max_nodes = 256;
            off.cache = false;
            const Verdict a = decide(1, f, on);
            const Verdict b = decide(1, f, off);
            EXPECT_EQ(a.value, b.value) << render(f);
            EXPECT_EQ(a.structures, b.structures) << render(f);
            EXPECT_EQ(b.cache_hits, 0u);
        }
    }
}

TEST(Decide, ParallelScanMatchesSequential)
{
    for (const char* text : {"forall x. exists y. x in y", "exists x, y. (x in y & !(y in x))",
                             "forall x,u0,u1,u2. ((u0 in x & u1 in x & u2 in x) -> (u0=u1 | u0=u2 | u1=u2))"}) {
        const std::size_t k = std::string(text).find("u2") != std::string::npos ? 2 : 1;
        for (auto algo : {Algorithm::Block, Algorithm::Rank}) {
            if (k == 2 && algo == Algorithm::Rank) continue;
            DecideOptions one, three;
            one.algorithm = three.algorithm = algo;
            three.jobs = 3;
            const Verdict a = decide(k, text, one);
            const Verdict b = decide(k, text, three);
            EXPECT_EQ(a.value, b.value) << text;
            EXPECT_EQ(a.structures, b.structures) << text;
        }
    }
}

TEST(Decide, UnsoundLevelIsMarked)
{
    DecideOptions opts;
    opts.unsound_m = 2;
    const Verdict v = decide(1, "forall x. exists y. x in y", opts);
    EXPECT_FALSE(v.sound);
    EXPECT_EQ(v.m, 2);
}

TEST(Decide, TimeoutAndCapAreIncomplete)
{
    DecideOptions opts;
    opts.timeout = std::chrono::duration<double>(0.2);
    try {
        decide(2, extensionality_axiom(), opts);
        FAIL() << "expected an incomplete decision";
    } catch (const IncompleteDecision& e) {
        EXPECT_EQ(e.reason(), IncompleteDecision::Reason::Timeout);
        EXPECT_GT(e.stats().structures, 0u);
    }
    try {
        decide(2, pairing_axiom(2));
        FAIL() << "expected an incomplete decision";
    } catch (const IncompleteDecision& e) {
        EXPECT_EQ(e.reason(), IncompleteDecision::Reason::Cap);
    }
}

TEST(Decide, TraceStreamsEvents)
{
    std::vector<std::string> lines;
    DecideOptions opts;
    opts.trace = [&](const std::string& l) { lines.push_back(l); };
    decide(1, "exists x. x in x", opts);
    ASSERT_FALSE(lines.empty());
    EXPECT_EQ(lines.front().rfind("scan exists", 0), 0u);
}

// -- characteristic and defining formulas, elimination ----------------------

TEST(Characteristic, Examples)
{
    EXPECT_EQ(render(characteristic_formula(make({"a"}, {}, {"a"}))), "!(x0 in x0)");
    const Formula chain = characteristic_formula(make({"a", "b"}, {{"a", "b"}}, {"a"}));
    EXPECT_EQ(chain.kind(), FormulaKind::BoundedExists);
    EXPECT_EQ(chain.var(), "x1");
    EXPECT_EQ(chain.other(), "x0");
    EXPECT_EQ(quantifier_count(chain), 1u);
    EXPECT_EQ(render(chain), "exists x1 in x0. ((((!(x0 in x0) & !(x0 in x1)) & x1 in x0) & !(x1 in x1)) & !(x0 = x1))");
    const std::vector<std::string> names{"x0"};
    EXPECT_TRUE(eval_bounded(chain, {{"x0", parse_set("{{}}")}}));
    EXPECT_FALSE(eval_bounded(chain, {{"x0", parse_set("{}")}}));
    EXPECT_EQ(render(characteristic_formula(Structure{})), "true");
}

TEST(Characteristic, QuantifierCountBound)
{
    for (std::size_t k = 1; k <= 2; ++k)
        for (Level n = 0; n <= 2; ++n)
            for (std::size_t l = 1; l <= 2; ++l) {
                if (node_bound(k, n, l) > 7) continue;
                const BigNat limit = BigNat{l} * (k_leq(k, n) - 1);
                for (const auto& c : enumerate(k, n, l)) {
                    const Formula psi = characteristic_formula(c.structure);
                    ASSERT_LE(BigNat{quantifier_count(psi)}, limit);
                    ASSERT_TRUE(is_bounded(psi));
                }
            }
}

TEST(Defining, Examples)
{
    const Structure root = make({"a"}, {}, {"a"});
    const Formula def = defining_formula(root, 1, 1);
    ASSERT_EQ(def.kind(), FormulaKind::And);
    EXPECT_EQ(render(def.lhs()), render(characteristic_formula(root)));
    ASSERT_EQ(def.rhs().kind(), FormulaKind::Not);
    EXPECT_EQ(render(def.rhs().body()), render(characteristic_formula(make({"a", "b"}, {{"a", "b"}}, {"a"}))));
    // one class only at k = 0
    EXPECT_EQ(render(defining_formula(root, 0, 2)), render(characteristic_formula(root)));
}

TEST(Defining, SelectsExactlyItsClass)
{
    for (const auto& [k, n, l] : std::vector<std::tuple<std::size_t, Level, std::size_t>>{{1, 2, 1}, {2, 1, 1}, {1, 1, 2}}) {
        const auto classes = enumerate(k, n, l);
        std::vector<std::vector<HSet>> reps;
        for (const auto& c : classes) reps.push_back(realize(c.structure, k, n));
        const auto names = default_tuple_names(l);
        for (std::size_t i = 0; i < classes.size(); ++i) {
            const Formula def = defining_formula(classes[i].structure, classes, names);
            for (std::size_t j = 0; j < classes.size(); ++j) {
                std::map<std::string, HSet> env;
                for (std::size_t p = 0; p < l; ++p) env[names[p]] = reps[j][p];
                ASSERT_EQ(eval_bounded(def, env), i == j) << k << n << l << " " << i << " " << j;
            }
        }
    }
}

TEST(Qe, Examples)
{
    const Formula empty_x = quantifier_eliminate(1, parse_formula("forall t. !(t in x)"));
    const auto classes = enumerate(1, 3, 1);
    ASSERT_EQ(classes.size(), 4u);
    const Structure root = make({"a"}, {}, {"a"});
    EXPECT_EQ(render(empty_x), render(defining_formula(root, classes, {"x"})));

    const Formula any = quantifier_eliminate(1, parse_formula("exists y. x in y"));
    std::size_t disjuncts = 1;
    for (Formula f = any; f.kind() == FormulaKind::Or; f = f.lhs()) ++disjuncts;
    EXPECT_EQ(disjuncts, 4u);
    EXPECT_TRUE(is_bounded_existential_combination(any));

    const Formula qf = parse_formula("x in y | x = y");
    EXPECT_EQ(render(quantifier_eliminate(1, qf)), render(qf));
    EXPECT_EQ(render(quantifier_eliminate(1, parse_formula("exists y. y in y"))), "false");
}

TEST(Qe, OutputAgreesWithSearchOnConcreteSets)
{
    std::mt19937_64 rng(4);
    for (const char* text : {"exists t. (t in x & t in y)", "forall t. (t in x -> exists s. s in t)"}) {
        const Formula f = parse_formula(text);
        const Formula out = quantifier_eliminate(1, f);
        const auto vars = free_variables(f);
        const Level n = saturate_level(t_rank(1, rank(f)));
        for (int i = 0; i < 30; ++i) {
            const auto sets = random_tuple(rng, 1, vars.size(), 6);
            std::map<std::string, HSet> env;
            for (std::size_t p = 0; p < vars.size(); ++p) env[vars[p]] = sets[p];
            EXPECT_EQ(eval_bounded(out, env), sksat(tcl_structure(sets, n), n, f, 1)) << text;
        }
    }
}

TEST(Decide, ClosedPartsAreSettledFirst)
{
    int calls = 0;
    const Formula f = parse_formula("forall w. ((exists u. u = u) <-> exists v. w in v)");
    const Formula g = detail::settle_closed_parts(f, [&](const Formula&) { return ++calls, true; });
    EXPECT_EQ(calls, 1);
    EXPECT_EQ(render(g), "forall w. (true <-> (exists v. w in v))");
    DecideOptions opts;
    opts.timeout = std::chrono::duration<double>(20);
    const char* text = "forall w. ((((exists v. w in v) <-> (w in w & w in w)) <-> w in w) -> "
                       "(((exists u. u = u) <-> w in w) | ((w = w -> w in w) -> (w = w -> w in w))))";
    EXPECT_TRUE(decide(1, text, opts).value);
    opts.algorithm = Algorithm::Rank;
    EXPECT_TRUE(decide(1, text, opts).value);
}
