#pragma once

// The acceptance battery: eleven end-to-end checks, one per headline claim
// of the library, each with tolerances pinned in code.  Shared by the
// acceptance_suite test binary and the CLI `suite` subcommand.

#include <string>
#include <vector>

#include "tll/config.hpp"

namespace tll {

struct CriterionResult {
    int index = 0;        // 1-based position in the battery
    std::string name;     // short slug describing what is verified
    bool pass = false;
    std::string detail;   // measured values behind the verdict
    double seconds = 0.0;
};

// Runs all eleven criteria in order.  Exceptions inside a criterion are
// caught and reported as failures; the battery always returns eleven rows.
std::vector<CriterionResult> run_acceptance_battery(const Config& cfg);

}  // namespace tll
