// Acceptance gate: runs every criterion at its pinned tolerance and prints
// one pass/fail line each. Exit status is nonzero when any criterion fails.

#include "porous/verify.hpp"

#include <cstdio>
#include <iostream>

int main() {
    porous::VerifyOptions opt;
    opt.seed = 1;
    porous::AcceptanceReport report = porous::run_acceptance_report(opt);
    std::cout << porous::summary_text(report);
    return porous::all_passed(report.criteria) ? 0 : 1;
}
