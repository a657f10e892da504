// Acceptance gate: runs the full verification suite (including the two
// reconstruction studies at benchmark scale) and prints one PASS/FAIL line
// per check. Exit status is the number of failing checks.

#include <cstring>
#include <iostream>

#include "magpie/verify.hpp"

int main(int argc, char **argv) {
    magpie::VerifyOptions opt;
    opt.progress = &std::cerr;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--no-reconstructions") == 0) opt.run_reconstructions = false;
        else {
            std::cerr << "usage: " << argv[0] << " [--no-reconstructions]\n";
            return 2;
        }
    }

    const std::vector<magpie::CheckResult> results = magpie::run_verification(opt);
    const int failures = magpie::report_verification(results, std::cout);
    if (failures > 0)
        std::cout << failures << " of " << results.size() << " checks failed\n";
    else
        std::cout << "all " << results.size() << " checks passed\n";
    return failures > 100 ? 100 : failures;
}
