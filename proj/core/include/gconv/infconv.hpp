#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gconv/driver.hpp"
#include "gconv/gexpectation.hpp"
#include "gconv/gheat.hpp"
#include "gconv/grid.hpp"
#include "gconv/payoff.hpp"

namespace gconv {

/// Transfer contract between the two agents, represented on a control grid
/// and gauge-fixed to vanish at 0 (cash invariance makes constants a flat
/// direction of the functional).
///
/// rank 1: F = sum_k psi_k(B_{s_k}) over the stage times s_1 < ... < s_K;
/// stage_values[k] holds the control values of psi_{k+1}, interpolated
/// piecewise-linearly and extended linearly outside the control grid. The
/// single-stage case is the plain psi(B_t) family.
///
/// rank 2 (two-increment payoffs): one stage holding a flattened
/// n x n tensor psi(B_{t1}, B_{t2} - B_{t1}) with bilinear interpolation;
/// stage_times = {t1, t2}, row index = first coordinate.
struct Contract {
    SpatialGrid control = SpatialGrid(1.0, 3);
    std::vector<double> stage_times;
    std::vector<std::vector<double>> stage_values;
    int rank = 1;

    static Contract zero(const SpatialGrid& control, std::vector<double> stage_times);
    static Contract zero_tensor(const SpatialGrid& control, double t1, double t2);

    int stages() const { return static_cast<int>(stage_values.size()); }

    /// F at the given coordinates: rank 1 takes the path levels
    /// B_{s_1}, ..., B_{s_K}; rank 2 takes (B_{t1}, B_{t2} - B_{t1}).
    double eval(std::span<const double> coords) const;

    /// Subtracts psi_k(0) from every stage.
    void gauge_fix();

    /// "x,psi" with one psi column per stage; rank 2 writes "x1,x2,psi"
    /// rows in row-major order. Full precision.
    void to_csv(std::ostream& out) const;
};

/// Coordinate-descent knobs. max_iters caps accepted updates; a full sweep
/// whose total improvement falls below tolerance stops the search. Steps
/// start at initial_step and backtrack by step_decay down to min_step.
struct OptimizerSettings {
    int max_iters = 500;
    double tolerance = 1e-5;
    double initial_step = 0.25;
    double step_decay = 0.5;
    double min_step = 1e-7;
};

/// One inf-convolution instance: minimize J(F) = E_1[X - F] + E_2[F] over
/// the contract family.
///
/// contract_time must be one of the payoff's times (the last by default).
/// partition_levels > 1 refines the family to K stage functions at the
/// evenly spaced times k * contract_time / K (single-increment payoffs
/// only); the K = 1 default is the plain psi(B_t) family. Two-increment
/// payoffs with the contract at the horizon use the rank-2 tensor family on
/// a coarse control grid (control_points per axis, default 9 there, 41
/// otherwise).
///
/// Every functional evaluation of one problem shares one PDE grid, sized
/// once from the payoff's envelope and both bands; the control grid is the
/// inner half of that domain. A fixed discretization keeps J exactly convex
/// across evaluations.
struct InfConvProblem {
    Driver d1;
    Driver d2;
    CylinderPayoff X;
    double contract_time;
    int control_points;
    int partition_levels = 1;
    OptimizerSettings optimizer;
    SolveConfig solve;

    InfConvProblem(Driver first, Driver second, CylinderPayoff payoff);
};

/// Throws std::invalid_argument when the problem is malformed: contract
/// time not a payoff time, partition refinement on a multi-increment
/// payoff, or an even / too-small control grid.
void validate(const InfConvProblem& p);

/// The PDE grid every evaluation of this problem runs on.
SpatialGrid problem_grid(const InfConvProblem& p);

/// The control grid contracts live on: control_points nodes over the inner
/// half of the PDE domain.
SpatialGrid control_grid(const InfConvProblem& p);

/// J(F) = E_{d1}[X - F] + E_{d2}[F] on the problem's shared grid. Sums of
/// stage functions evaluate by one backward chain per term (the stage terms
/// peel off one at a time under conditioning), so the cost matches a single
/// full-horizon evaluation regardless of the stage count.
double functional_J(const InfConvProblem& p, const Contract& f);

/// Single-stage form: psi as a function of B at the contract time,
/// interpolated from whatever grid it is given on.
double functional_J(const InfConvProblem& p, const GridFunction& psi);

/// E[sum of stage functions along the path] under one band: the second term
/// of the functional in isolation, run as the same backward level chain. cfg
/// sizes the grid.
double contract_expectation(const Contract& f, const Driver& d, const SolveConfig& cfg = {});

/// Search record. j_history holds the accepted iterates only, so it is
/// non-increasing; evaluations counts every functional evaluation spent.
struct OptimizerTrace {
    int iterations = 0;
    long long evaluations = 0;
    std::vector<double> j_history;
    Contract best;
    double best_j = 0.0;
    std::optional<double> target;
    std::optional<double> gap;
};

/// "iter,J,gap" rows over j_history; the gap column is blank unless the
/// trace carries a target.
void trace_to_csv(const OptimizerTrace& trace, std::ostream& out);

/// Multi-start coordinate descent on the control values.
///
/// Starts: zero; the payoff as a final-stage contract and half of it
/// (single-increment payoffs; the tensor analogues for rank 2); and a
/// constructive curvature split that rebuilds the convolved band's stage
/// values and transfers the curvature sign the second band prices closer
/// to the intersection. When the second band contains the first, zero
/// transfer is optimal and is returned without iterating.
///
/// Descent sweeps the control values in a fixed order; each coordinate
/// probes +-step (the central-difference direction), then backtracks. J is
/// convex over the family on the fixed grid, so the best found converges to
/// the family's infimum as iterations grow.
///
/// Throws std::runtime_error("degenerate: value is -inf ...") when the
/// bands do not intersect.
OptimizerTrace minimize(const InfConvProblem& p);

/// Slope diagnostics for disjoint bands: with X = 0 and F = -lambda B_t^2,
/// J(lambda) = lambda t (hi_1^2 - lo_2^2) drops linearly without bound.
/// Roles are swapped when the first band lies above the second, so the
/// probed direction is always the divergent one.
struct DivergenceReport {
    double t = 0.0;
    bool swapped = false;
    std::vector<double> lambdas;
    std::vector<double> j_values;
    double slope_fit = 0.0;
    double slope_predicted = 0.0;
};

/// Least-squares slope of J(-lambda B_t^2) against lambda. Throws
/// std::invalid_argument when the bands intersect (the functional is then
/// bounded below and the probe means nothing) or lambda_grid is empty.
DivergenceReport detect_divergence(const Driver& d1, const Driver& d2, double t,
                                   std::span<const double> lambda_grid,
                                   const SolveConfig& cfg = {});

/// Shared settings for theorem verification runs.
struct TheoremSettings {
    int control_points = 0;  // 0: the problem default for the payoff's family
    int partition_levels = 1;
    OptimizerSettings optimizer;
    SolveConfig solve;
    double tol_theorem = 5e-3;  // on the gap, times scale = max(1, |target|)
    double tol_lower = 2e-3;    // accepted iterates stay above target - this * scale
};

/// Verdict of one equality check: target is the direct evaluation under the
/// convolved band, achieved the best functional value found.
struct TheoremReport {
    double target = 0.0;
    double achieved = 0.0;
    double gap = 0.0;  // achieved - target
    double scale = 1.0;
    double tol_theorem = 5e-3;
    double tol_lower = 2e-3;
    bool pass = false;            // |gap| <= tol_theorem * scale
    bool lower_bound_ok = false;  // every accepted iterate >= target - tol_lower * scale
    OptimizerTrace trace;
};

/// Compares minimize against the direct evaluation under the convolved
/// band. The lower bound is checked on every accepted iterate: the
/// functional dominates the convolved-band value pointwise, so falling
/// below target by more than the slack exposes a discretization defect.
TheoremReport verify_theorem(const CylinderPayoff& X, const Driver& d1, const Driver& d2,
                             const TheoremSettings& cfg = {});

/// One pairwise stage of the n-band reduction.
struct NaryStage {
    Driver left;   // accumulated band entering the stage
    Driver right;  // band convolved in
    TheoremReport theorem;
};

/// Left-associated reduction over n bands, plus the same reduction over the
/// reversed list as a permutation check: the final band must match exactly,
/// the achieved values within 2 * tol_theorem * scale.
struct NaryReport {
    bool degenerate = false;
    std::size_t degenerate_stage = 0;  // input index whose band empties the intersection
    std::vector<NaryStage> stages;
    std::optional<Driver> final_driver;
    double final_target = 0.0;
    double final_achieved = 0.0;
    double permutation_achieved = 0.0;
    bool permutation_driver_exact = false;
    bool permutation_achieved_close = false;
};

/// Iterated pairwise verification under left association. An empty
/// intersection at any stage yields a degenerate report, not an error.
/// Needs at least two drivers.
NaryReport convolve_n_expectations(std::span<const Driver> drivers, const CylinderPayoff& X,
                                   const TheoremSettings& cfg = {});

}  // namespace gconv
