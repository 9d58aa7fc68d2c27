// Runs every acceptance criterion at full size and prints one line each.
// Pass "quick" as the first argument for the reduced corpus.

#include <iostream>
#include <string>

#include "hk/acceptance.hpp"

int main(int argc, char** argv)
{
    using namespace hk::acceptance;
    const SuiteLevel level = argc > 1 && std::string(argv[1]) == "quick" ? SuiteLevel::Quick : SuiteLevel::Full;
    const auto results = run_all(level, hk::kDefaultSeed, [](const Outcome& o) { std::cout << format_line(o) << std::endl; });
    std::size_t failed = 0;
    for (const auto& o : results) failed += o.pass ? 0 : 1;
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
    return failed ? 1 : 0;
}
