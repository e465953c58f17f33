#pragma once

#include <string>
#include <vector>

#include "docalc/weights.hpp"

namespace docalc {

struct CheckResult {
    std::string name;
    bool passed = false;
    double residual = 0.0;  // measured defect; negative values mean margin
    double tolerance = 0.0;
    std::string note;
};

struct VerifyOptions {
    double tol_scale = 1.0;  // multiplies every built-in tolerance
    double tol_abs = 0.0;    // > 0 replaces every tolerance outright
    int grid_n = 128;        // grid order for the matrix-level checks
    bool quick = false;      // smaller grids for a fast smoke pass
    double lambda_min = 1e-8;  // spectral rule window and resolution
    double lambda_max = 1e8;
    int stieltjes_panels = 4;  // panels per decade
};

// Runs the full invariant battery (kernel identities, contour robustness,
// grid operator properties, matrix calculus structure) for one weight.
// Throws std::invalid_argument if the weight itself is inadmissible; any
// failure inside a check is captured in that check's result instead.
std::vector<CheckResult> run_verification(const WeightFunction& w, const VerifyOptions& opt = {});

bool all_passed(const std::vector<CheckResult>& results);

// Deterministic JSON report: an ordered array of checks plus a summary.
std::string results_to_json(const std::vector<CheckResult>& results);

} // namespace docalc
