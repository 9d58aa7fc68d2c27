#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hk/cli.hpp"

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = hk::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& text)
{
    const auto path = std::filesystem::path(HK_TEST_DATA_DIR) / name;
    std::ofstream(path) << text;
    return path.string();
}

} // namespace

TEST(Cli, DecideExample)
{
    const auto r = run({"decide", "--k", "1", "exists y. forall t. !(t in y)"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "true\n");
    const auto f = run({"decide", "--k", "2", "exists x. x in x"});
    EXPECT_EQ(f.code, 0);
    EXPECT_EQ(f.out, "false\n");
}

TEST(Cli, EnumerateCount)
{
    const auto r = run({"enumerate", "--k", "1", "--m", "1", "--l", "1", "--count-only"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "2\n");
    const auto full = run({"enumerate", "--k", "2", "--m", "1", "--l", "1"});
    EXPECT_NE(full.out.find("4 classes"), std::string::npos);
}

TEST(Cli, EnumerateJsonIsStructureFormat)
{
    const auto r = run({"enumerate", "--k", "2", "--m", "1", "--l", "2", "--format", "json"});
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const hk::Structure s = hk::parse_structure(line);
        EXPECT_TRUE(hk::validate(s, 2, 1));
        ++n;
    }
    EXPECT_EQ(n, 433u);
}

TEST(Cli, BoundsExample)
{
    const auto r = run({"bounds", "--k", "2", "--n", "2"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("t_rank=68\n"), std::string::npos);
    EXPECT_NE(r.out.find("t_rank <= 2^{"), std::string::npos);
    EXPECT_NE(r.out.find("holds"), std::string::npos);
}

TEST(Cli, JsonIsByteStable)
{
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"decide", "--k", "1", "--format", "json", "forall x. exists y. x in y"},
          std::vector<std::string>{"bounds", "--k", "3", "--n", "3", "--q", "2", "--format", "json"},
          std::vector<std::string>{"qe", "--k", "1", "--format", "json", "exists y. x in y"}}) {
        const auto a = run(args);
        const auto b = run(args);
        EXPECT_EQ(a.code, 0);
        EXPECT_EQ(a.out, b.out);
        EXPECT_TRUE(nlohmann::json::accept(a.out));
    }
    const auto j = nlohmann::json::parse(run({"decide", "--k", "1", "--format", "json", "exists x. x = x"}).out);
    EXPECT_EQ(j.at("elapsed_ms").get<int>(), 0);
    EXPECT_TRUE(j.at("sound").get<bool>());
    EXPECT_TRUE(j.at("m").is_string());
}

TEST(Cli, UnsoundLevelIsMarked)
{
    const auto r = run({"decide", "--k", "1", "--unsound-m", "1", "--format", "json", "exists x. x = x"});
    EXPECT_EQ(r.code, 0);
    EXPECT_FALSE(nlohmann::json::parse(r.out).at("sound").get<bool>());
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(run({"decide", "--k", "1", "exists x."}).code, 2);
    EXPECT_EQ(run({"decide", "exists x. x = x"}).code, 2);
    EXPECT_EQ(run({"decide", "--k", "1", "--file", "a", "x = x"}).code, 2);
    EXPECT_EQ(run({"nonsense"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"decide", "--k", "2", "--max-nodes", "4", "forall x. exists y. x in y"}).code, 3);
    const auto t = run({"decide", "--k", "2", "--timeout", "0.2", "--format", "json",
                        "forall x, y. ((forall t. (t in x <-> t in y)) -> x = y)"});
    EXPECT_EQ(t.code, 3);
    EXPECT_EQ(nlohmann::json::parse(t.out).at("error"), "timeout");
}

TEST(Cli, DecideFromFileAndTrace)
{
    const auto path = temp_file("sentence.txt", "exists x, y.\n  x in y\n");
    const auto r = run({"decide", "--k", "1", "--file", path, "--trace"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "true\n");
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, CheckStructure)
{
    const auto good = temp_file("good.json", R"({"nodes":["a","b"],"edges":[["a","b"]],"tuple":["a"]})");
    auto r = run({"check-structure", "--k", "1", "--m", "1", "--file", good});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("valid\n", 0), 0u);
    const auto loop = temp_file("loop.json", R"({"nodes":["a"],"edges":[["a","a"]],"tuple":["a"]})");
    r = run({"check-structure", "--k", "1", "--m", "1", "--file", loop});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("invalid\n", 0), 0u);
    const auto bad = temp_file("bad.json", R"({"nodes":["a"],"edges":[["a","z"]],"tuple":["a"]})");
    EXPECT_EQ(run({"check-structure", "--k", "1", "--m", "1", "--file", bad}).code, 2);
}

TEST(Cli, Eval)
{
    auto r = run({"eval", "--k", "2", "--assign", "x={{}};y={{},{{}}}", "exists t in y. x = t"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "true\n");
    r = run({"eval", "--k", "1", "--format", "json", "--assign", "x={}", "exists y. x in y"});
    EXPECT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_TRUE(j.at("value").get<bool>());
    EXPECT_EQ(j.at("method"), "search");
    EXPECT_EQ(run({"eval", "--k", "1", "--assign", "x={{},{{}}}", "x = x"}).code, 2);
    EXPECT_EQ(run({"eval", "--k", "1", "--assign", "x={}", "x in y"}).code, 2);
}

TEST(Cli, Qe)
{
    const auto r = run({"qe", "--k", "1", "exists y. y in y"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "false\n");
    const auto j = nlohmann::json::parse(run({"qe", "--k", "1", "--format", "json", "exists y. x in y"}).out);
    EXPECT_EQ(j.at("free"), nlohmann::json::array({"x"}));
    const auto out = hk::parse_formula(j.at("output").get<std::string>());
    EXPECT_TRUE(hk::is_bounded_existential_combination(out));
}

TEST(Cli, SelftestSingleCriterion)
{
    const auto r = run({"selftest", "--criterion", "1"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("criterion 1 PASS", 0), 0u);
    EXPECT_EQ(run({"selftest", "--criterion", "12"}).code, 2);
}
