#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "hk/decide.hpp"
#include "hk/hset.hpp"
#include "hk/oracle.hpp"

using namespace hk;

namespace {

Structure make(std::vector<std::string> nodes, std::vector<std::pair<std::string, std::string>> edges,
               std::vector<std::string> tuple)
{
    return Structure::from_names(nodes, edges, tuple);
}

const HSet kEmpty{};

} // namespace

TEST(HSet, ParseAndRender)
{
    EXPECT_EQ(parse_set("{}"), kEmpty);
    EXPECT_EQ(parse_set("{{},{}}"), HSet::singleton(kEmpty));
    EXPECT_EQ(render_set(HSet::of({HSet::singleton(kEmpty), kEmpty})), "{{},{{}}}");
    EXPECT_EQ(render_set(parse_set(" { {{}} , {} } ")), "{{},{{}}}");
    for (const char* bad : {"", "{", "{}}", "{,}", "{{}", "x"}) EXPECT_THROW(parse_set(bad), ParseError) << bad;
    try {
        parse_set("{\n{},\n}");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(HSet, RoundTripAndInterning)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 300; ++i) {
        const HSet s = random_hset(rng, 3, 5);
        EXPECT_EQ(parse_set(render_set(s)), s);
        EXPECT_EQ(render_set(parse_set(render_set(s))), render_set(s));
    }
}

TEST(HSet, ExtensionalAndOrdered)
{
    const HSet one = HSet::singleton(kEmpty);
    const HSet a = HSet::of({one, kEmpty, one});
    EXPECT_EQ(a.size(), 2u);
    EXPECT_TRUE(a.contains(kEmpty));
    EXPECT_TRUE(a.contains(one));
    EXPECT_FALSE(a.contains(a));
    EXPECT_EQ(HSet::of({kEmpty, one}), HSet::of({one, kEmpty}));
    EXPECT_EQ(HSet::tower(3), parse_set("{{{{}}}}"));
}

TEST(HSet, ConcurrentInterningAgrees)
{
    std::vector<HSet> got(4);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&got, t] {
            HSet x;
            for (int i = 0; i < 200; ++i) x = HSet::of({x, HSet::tower(static_cast<std::size_t>(i % 7))});
            got[static_cast<std::size_t>(t)] = x;
        });
    for (auto& th : threads) th.join();
    for (const HSet& g : got) EXPECT_EQ(g, got[0]);
}

TEST(CheckK, Examples)
{
    EXPECT_TRUE(check_k(kEmpty, 0));
    EXPECT_FALSE(check_k(parse_set("{{},{{}}}"), 1));
    EXPECT_TRUE(check_k(parse_set("{{},{{}}}"), 2));
    EXPECT_FALSE(check_k(parse_set("{{{},{{}}}}"), 1));
}

TEST(Tcl, Examples)
{
    const HSet one = HSet::singleton(kEmpty);
    const Structure s1 = tcl_structure({one}, 1);
    EXPECT_TRUE(isomorphic(s1, make({"a", "b"}, {{"a", "b"}}, {"a"})));
    const Structure s0 = tcl_structure({one}, 0);
    EXPECT_TRUE(isomorphic(s0, make({"a"}, {}, {"a"})));
    EXPECT_EQ(s1.name(s1.tuple()[0]), "{{}}");
}

TEST(Tcl, SizeValidityAndMonotoneRestriction)
{
    std::mt19937_64 rng(2);
    for (int i = 0; i < 300; ++i) {
        const std::size_t k = 1 + i % 2;
        const std::size_t l = 1 + (i / 2) % 3;
        const Level n = static_cast<Level>(i % 5);
        const auto t = random_tuple(rng, k, l, 6);
        const Structure s = tcl_structure(t, n);
        EXPECT_LE(s.size(), node_bound(k, n, l));
        EXPECT_TRUE(validate(s, k, n));
        EXPECT_TRUE(literally_equal(s, restrict(tcl_structure(t, n + 1), n)));
    }
}

TEST(Sim, Examples)
{
    const HSet one = HSet::singleton(kEmpty);
    const HSet two = HSet::singleton(one);
    EXPECT_TRUE(sim_n({one}, {two}, 1));
    EXPECT_FALSE(sim_n({one}, {two}, 2));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto t = random_tuple(rng, 2, 2, 4);
        EXPECT_TRUE(sim_n(t, t, static_cast<Level>(i % 4)));
    }
    EXPECT_THROW(sim_n({one}, {one, two}, 1), PreconditionError);
}

TEST(Sim, DecreasingInLevel)
{
    std::mt19937_64 rng(5);
    std::size_t positive = 0;
    for (int i = 0; i < 2000; ++i) {
        const std::size_t k = 1 + i % 2;
        const auto a = random_tuple(rng, k, 1, 3);
        const auto b = random_tuple(rng, k, 1, 3);
        for (Level n = 0; n < 4; ++n)
            if (sim_n(a, b, n + 1)) {
                ++positive;
                EXPECT_TRUE(sim_n(a, b, n));
            }
    }
    EXPECT_GT(positive, 0u);
}

TEST(EvalBounded, Examples)
{
    const HSet one = HSet::singleton(kEmpty);
    EXPECT_TRUE(eval_bounded(parse_formula("forall t in x. false"), {{"x", kEmpty}}));
    EXPECT_FALSE(eval_bounded(parse_formula("exists t in x. forall s in t. false"), {{"x", HSet::singleton(one)}}));
    EXPECT_TRUE(eval_bounded(parse_formula("x in y"), {{"x", kEmpty}, {"y", one}}));
    EXPECT_THROW(eval_bounded(parse_formula("exists t. t in x"), {{"x", kEmpty}}), PreconditionError);
    EXPECT_THROW(eval_bounded(parse_formula("x in y"), {{"x", kEmpty}}), PreconditionError);
}

TEST(EvalBounded, ShadowingUsesInnermostBinding)
{
    const HSet one = HSet::singleton(kEmpty);
    // inner x ranges over the elements of the outer x
    EXPECT_TRUE(eval_bounded(parse_formula("exists y in x. forall x in y. false"), {{"x", one}}));
}

TEST(Assignment, Parse)
{
    const auto env = parse_assignment("x={{}};y={}");
    ASSERT_EQ(env.size(), 2u);
    EXPECT_EQ(env.at("x"), HSet::singleton(kEmpty));
    EXPECT_EQ(env.at("y"), kEmpty);
    EXPECT_EQ(parse_assignment(" a = {} ; ").size(), 1u);
    EXPECT_THROW(parse_assignment("x"), ParseError);
    EXPECT_THROW(parse_assignment("={}"), ParseError);
}

TEST(Realize, Examples)
{
    EXPECT_EQ(realize(make({"a"}, {}, {"a"}), 1, 1), std::vector<HSet>{kEmpty});
    EXPECT_EQ(realize(make({"a", "b"}, {{"a", "b"}}, {"a"}), 1, 1), std::vector<HSet>{HSet::singleton(kEmpty)});
    // two opaque leaves need different completions that stay unrelated at level 1
    const Structure two = make({"r", "b", "c"}, {{"r", "b"}, {"r", "c"}}, {"r"});
    const auto sets = realize(two, 2, 1);
    EXPECT_TRUE(check_k(sets[0], 2));
    EXPECT_TRUE(isomorphic(tcl_structure(sets, 1), two));
    EXPECT_NE(sets[0], parse_set("{{},{{}}}"));
    EXPECT_THROW(realize(make({"a"}, {{"a", "a"}}, {"a"}), 1, 1), PreconditionError);
}

TEST(Realize, RoundTripOnEnumeratedClasses)
{
    for (const auto& [k, m, l] : std::vector<std::tuple<std::size_t, Level, std::size_t>>{
             {1, 2, 2}, {1, 5, 1}, {2, 1, 2}, {2, 0, 4}, {1, 0, 5}}) {
        for (const auto& c : enumerate(k, m, l)) {
            const auto sets = realize(c.structure, k, m);
            for (HSet s : sets) ASSERT_TRUE(check_k(s, k));
            ASSERT_TRUE(isomorphic(tcl_structure(sets, m), c.structure)) << c.key.hex();
        }
    }
}

TEST(Absoluteness, BoundedFormulasAgreeWithSearch)
{
    std::mt19937_64 rng(8);
    FormulaGenerator gen(9);
    const std::vector<std::string> names{"p", "q"};
    for (int i = 0; i < 150; ++i) {
        const std::size_t k = 1 + i % 2;
        const Formula f = gen.bounded_formula(names, k == 1 ? 2 : 1, 2, 5);
        const Formula g = desugar_bounded(f);
        const auto vars = free_variables(g);
        const auto sets = random_tuple(rng, k, 2, 4);
        std::map<std::string, HSet> env{{"p", sets[0]}, {"q", sets[1]}};
        std::vector<HSet> tuple;
        for (const auto& v : vars) tuple.push_back(env.at(v));
        const Level m = saturate_level(t_rank(k, rank(g)));
        DecideOptions opts;
        opts.caps.max_nodes = 128;
        EXPECT_EQ(eval_bounded(f, env), sksat(tcl_structure(tuple, m), m, g, k, opts)) << render(f);
    }
}
