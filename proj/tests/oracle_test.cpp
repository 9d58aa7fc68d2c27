#include <gtest/gtest.h>

#include <json.hpp>

#include "hk/oracle.hpp"

using namespace hk;

TEST(Brute, SmallCounts)
{
    EXPECT_EQ(brute_enumerate(1, 1, 1, 3).size(), 2u);
    EXPECT_EQ(brute_enumerate(2, 1, 1, 4).size(), 4u);
    EXPECT_EQ(brute_enumerate(2, 0, 2, 2).size(), 4u);
    EXPECT_EQ(brute_enumerate(0, 3, 2, 2).size(), 1u);
    EXPECT_THROW(brute_enumerate(2, 2, 2, 11), CapExceeded);
}

TEST(Brute, OutputIsValid)
{
    for (const auto& c : brute_enumerate(2, 1, 2, 5)) EXPECT_TRUE(validate(c.structure, 2, 1));
}

TEST(EvalK0, Examples)
{
    EXPECT_FALSE(eval_k0(parse_formula("exists x. x in x")));
    EXPECT_TRUE(eval_k0(parse_formula("forall x, y. x = y")));
    EXPECT_TRUE(eval_k0(parse_formula("exists x. forall t. !(t in x)")));
    EXPECT_FALSE(eval_k0(parse_formula("exists y in x. true")));
    EXPECT_TRUE(eval_k0(parse_formula("forall y in x. false")));
}

TEST(AxiomSuite, TagsAndCount)
{
    for (std::size_t k = 0; k <= 3; ++k) {
        const auto suite = axiom_suite(k);
        EXPECT_EQ(suite.size(), k == 0 ? 8u : 9u);
        for (const auto& a : suite) {
            EXPECT_NO_THROW(parse_formula(a.text)) << a.name;
            EXPECT_TRUE(is_sentence(parse_formula(a.text))) << a.name;
            if (a.name.rfind("B_", 0) == 0) {
                EXPECT_TRUE(a.feasible);
            }
            if (k >= 3 && a.name == "E") {
                EXPECT_FALSE(a.feasible);
            }
        }
    }
}

TEST(AxiomSuite, AxiomsHoldAtSmallK)
{
    for (std::size_t k = 0; k <= 1; ++k)
        for (const auto& a : axiom_suite(k)) {
            if (!a.feasible) continue;
            EXPECT_TRUE(decide(k, a.text).value) << "k=" << k << " " << a.name;
        }
}

TEST(Generator, RespectsLimits)
{
    FormulaGenerator gen(4);
    for (int i = 0; i < 300; ++i) {
        const Formula f = gen.sentence(3, 4, 6);
        EXPECT_TRUE(is_sentence(f));
        EXPECT_LE(rank(f), 3u);
        const Formula b = gen.bounded_formula({"a", "b"}, 2, 3, 5);
        for (const auto& v : free_variables(b)) EXPECT_TRUE(v == "a" || v == "b") << render(b);
    }
}

TEST(RandomSets, RespectK)
{
    std::mt19937_64 rng(6);
    for (int i = 0; i < 200; ++i) {
        const std::size_t k = i % 4;
        EXPECT_TRUE(check_k(random_hset(rng, k, 5), k));
    }
}

TEST(Differential, SmallCorpusAgrees)
{
    CorpusOptions c;
    c.count = 30;
    c.seed = 12;
    DecideOptions opts;
    opts.caps.max_nodes = 256;
    for (std::size_t k = 0; k <= 1; ++k) {
        const auto report = differential(k, random_sentences(c), opts);
        EXPECT_TRUE(report.ok()) << report.json_lines(false);
        EXPECT_EQ(report.incomplete(), 0u);
        EXPECT_EQ(report.cases.size(), 30u);
    }
}

TEST(Differential, JsonLines)
{
    const auto report = differential(0, {parse_formula("exists x. x in x"), parse_formula("forall x. x = x")});
    std::istringstream in(report.json_lines(false));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_TRUE(j.at("agree").get<bool>());
        EXPECT_FALSE(j.contains("ms"));
        EXPECT_EQ(j.at("expected").get<std::string>(), n == 0 ? "false" : "true");
        ++n;
    }
    EXPECT_EQ(n, 2u);
}

TEST(Foundation, SelfMembershipNeverHolds)
{
    for (std::size_t k = 0; k <= 2; ++k) EXPECT_FALSE(decide(k, "exists x. x in x").value) << k;
}
