#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "gconv/driver.hpp"
#include "gconv/gheat.hpp"
#include "gconv/grid.hpp"
#include "gconv/payoff.hpp"

namespace gconv {

/// Conditional value psi_j(x1..xj) of a cylinder payoff given the first j
/// realized increments. For 1 <= j < m the function is stored on the tensor
/// product of the stage grids (row-major, last coordinate fastest) and
/// queried with linear interpolation per coordinate. j = 0 is the scalar
/// unconditional value; j = m delegates to the payoff itself.
class ConditionalResult {
  public:
    int j() const { return j_; }

    /// psi_j at the given increments (increments.size() >= j).
    double eval(std::span<const double> increments) const;

    /// Stage grids for coordinates 1..j (empty for j = 0 and j = m).
    const std::vector<SpatialGrid>& grids() const { return grids_; }

    /// Tensor values (empty for j = 0 and j = m).
    const std::vector<double>& values() const { return values_; }

    /// The j = 1 tensor as a grid function.
    GridFunction as_grid_function() const;

  private:
    friend ConditionalResult conditional(const CylinderPayoff&, const Driver&, int,
                                         const SolveConfig&);
    int j_ = 0;
    double scalar_ = 0.0;               // j = 0
    CylinderPayoff::Fn exact_;          // j = m
    std::vector<SpatialGrid> grids_;    // 1 <= j < m
    std::vector<double> values_;
};

/// Evaluation record for external consumers: the value, the config it was
/// computed under, and |value - value at half spatial resolution| as a
/// self-reported discretization error estimate.
struct EvalReport {
    double value = 0.0;
    SolveConfig config;
    double error_estimate = 0.0;
};

/// Per-stage node budget for an m-increment recursion: m = 1 keeps n_points,
/// m = 2 a quarter, m = 3 a sixteenth, floored at min(201, n_points) and
/// kept odd. Exposed so callers can pin nested evaluations to one budget.
int tensor_points(int n_points, int m);

/// E[X] under the driver's band by backward recursion: psi_m = phi, and
/// psi_j = (solve of y -> psi_{j+1}(x1..xj, y) over duration t_{j+1}-t_j,
/// read at y = 0) for each tensor point of the first j stage grids. Stage
/// grids are sized from the stage duration, so nested evaluations of the
/// same stages reuse identical nodes.
///
/// Tensor budgets shrink with m (cost grows as n^m): m = 1 uses
/// cfg.n_points, m = 2 a quarter, m = 3 a sixteenth (floored at 201, kept
/// odd). m > 3 is rejected.
double evaluate(const CylinderPayoff& X, const Driver& d, const SolveConfig& cfg);

/// evaluate plus the half-resolution error estimate.
EvalReport evaluate_report(const CylinderPayoff& X, const Driver& d, const SolveConfig& cfg);

/// evaluate with every stage pinned to the caller's grid: no per-stage
/// sizing and no tensor budget shrink (cfg.n_points is ignored). For
/// computations that must share one discretization exactly, such as the
/// inf-convolution functional; the caller keeps m >= 2 grids small.
double evaluate_on_grid(const CylinderPayoff& X, const Driver& d, const SpatialGrid& grid,
                        const SolveConfig& cfg);

/// psi_j of the recursion above. conditional(X, d, 0, cfg).eval({}) equals
/// evaluate(X, d, cfg); conditional at j = m is the payoff itself.
ConditionalResult conditional(const CylinderPayoff& X, const Driver& d, int j,
                              const SolveConfig& cfg);

/// Evaluates (E[phi(B_t - B_s)], E[phi(B_{t-s})]) with the first value
/// computed through a two-increment payoff that ignores its first
/// coordinate. Both sides use the same stage grid, so they agree to
/// rounding; the pair is the stationarity probe.
std::pair<double, double> stationarity_check(const std::function<double(double)>& phi,
                                             const GrowthEnvelope& envelope, const Driver& d,
                                             double s, double t, const SolveConfig& cfg);

}  // namespace gconv
