#pragma once

// The fourteen end-to-end acceptance checks, shared by the acceptance test
// binary and `mg1dde verify`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mg1 {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240601;
    /// Criterion ids to run; empty runs all.
    std::vector<int> only;
};

/// Runs the criteria in order; `report` (if set) sees each result as soon as
/// it is known. A criterion that throws is a failure carrying the message.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {},
                                            const std::function<void(const CriterionResult&)>& report = {});

/// "PASS  3  Case One constants  (detail)  [1.2 s]"
std::string format_result(const CriterionResult& r);

constexpr int kCriterionCount = 14;

}  // namespace mg1
