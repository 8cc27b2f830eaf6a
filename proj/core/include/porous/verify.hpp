#pragma once

#include "porous/harness.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace porous {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    std::string out_dir; // when nonempty, the sweep and flow CSVs land here
};

struct AcceptanceReport {
    std::vector<CriterionResult> criteria;
    // secondary evidence: log-log slopes of the sweep tables against eps
    std::vector<std::pair<std::string, SlopeFit>> slopes;
};

// Runs every acceptance criterion at its pinned tolerance.
AcceptanceReport run_acceptance_report(const VerifyOptions& opt);
std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt);

// One "criterion N pass/fail" line per entry plus fitted-slope evidence.
std::string summary_text(const AcceptanceReport& report);

bool all_passed(const std::vector<CriterionResult>& results);

} // namespace porous
