// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is 0 only when all criteria pass.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "cbci/verify.hpp"

int main(int argc, char** argv) {
    cbci::verify::Options opts;
    if (argc > 1) opts.seed = std::strtoull(argv[1], nullptr, 10);
    int failed = 0;
    for (int id = 1; id <= cbci::verify::kCriteria; ++id) {
        const cbci::verify::Criterion c = cbci::verify::run(id, opts);
        std::printf("%s\n", cbci::verify::format_line(c).c_str());
        std::fflush(stdout);
        if (!c.pass) ++failed;
    }
    std::printf("%d/%d criteria passed\n", cbci::verify::kCriteria - failed, cbci::verify::kCriteria);
    return failed == 0 ? 0 : 1;
}
