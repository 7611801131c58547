#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gconv::verify {

/// One measured property. `pass` is computed by the suite that owns the
/// check (most are |measured - target| <= tolerance, a few are one-sided
/// bounds or ratio floors, noted per check name in the runners).
struct Check {
    std::string name;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct SuiteReport {
    std::string suite;
    std::vector<Check> checks;
    double runtime_seconds = 0.0;
    bool pass() const;
};

/// Moment bounds, scaling law, Gaussian-oracle equality on one-sided
/// curvature, lattice agreement, and the dx convergence ratios.
SuiteReport run_moments();

/// The sublinear-expectation axioms plus tower and semigroup consistency,
/// checked structurally on shared grids.
SuiteReport run_axioms();

/// The transfer functional reaches the intersected band's value, and the
/// nested-band case needs no optimization at all.
SuiteReport run_theorem();

/// Disjoint bands: fitted lambda-slope of the unbounded direction against
/// its closed form.
SuiteReport run_divergence();

/// Three-band reduction: pairwise convolutions reach the total intersection
/// and the result ignores the order of the bands.
SuiteReport run_corollary();

/// "moments", "axioms", "theorem", "divergence", "corollary", or "all".
std::vector<SuiteReport> run_suite(std::string_view name);

}  // namespace gconv::verify
