#pragma once

#include <span>

#include "gconv/driver.hpp"
#include "gconv/grid.hpp"
#include "gconv/payoff_expr.hpp"

namespace gconv {

/// Knobs shared by every PDE-backed evaluation.
///
/// truncation_multiple k sizes the spatial domain as k * sigma_hi * sqrt(T)
/// before the tail test in build_grid; cfl_safety scales the largest stable
/// explicit time step; quad_order is the order of the Gaussian oracle used
/// for tail estimates and reference values.
struct SolveConfig {
    int truncation_multiple = 8;
    int n_points = 1601;
    double cfl_safety = 0.9;
    int quad_order = 64;
    long long step_budget = 10'000'000;
};

/// Throws std::invalid_argument when a field is out of range
/// (k >= 4, n_points odd >= 3, 0 < cfl_safety <= 1, quad_order >= 16).
void validate(const SolveConfig& cfg);

/// Uniform time discretization of [0, t_end] honoring the CFL bound
/// dt <= cfl_safety * dx^2 / sigma_hi^2.
struct TimeStepping {
    double t_end = 0.0;
    double dt = 0.0;
    long long n_steps = 0;
};

/// Plans n_steps = ceil(t_end / dt_max) uniform steps. Throws when the plan
/// exceeds cfg.step_budget; the caller must coarsen the grid instead.
TimeStepping plan_time_stepping(double t_end, double dx, double sigma_hi,
                                const SolveConfig& cfg);

/// Explicit monotone stepping of du/dt = G(d2u/dx2) from initial data phi
/// over duration t:
///
///     u'[j] = u[j] + dt * G((u[j+1] - 2u[j] + u[j-1]) / dx^2)
///
/// with zero second difference at the two boundary nodes (linear growth
/// continuation, matching the grid's linear extrapolation policy). The
/// scheme is monotone under the CFL bound, hence order-preserving, exact on
/// constants and linear data, and positively homogeneous.
///
/// Throws on CFL plans beyond the step budget and on non-finite values
/// appearing during stepping (domain too small for the payoff's growth).
GridFunction solve(const Driver& d, const GridFunction& phi, double t,
                   const SolveConfig& cfg);

/// Symmetric grid sized for horizon T and the widest driver band: half-width
/// starts at k * sigma_hi_max * sqrt(T) and doubles (at most 3 times) until
/// the envelope's mass beyond the boundary under the widest Gaussian law is
/// below 1e-6. The tail mass is the exact normal-tail moment of the envelope
/// bound C * (1 + |x|^m) * |x|, computed by the erfc recursion rather than
/// quadrature (node ranges cannot resolve the region beyond the boundary).
///
/// Throws "payoff growth too strong for configured grid budget" when no
/// candidate width passes.
SpatialGrid build_grid(const GrowthEnvelope& envelope, std::span<const Driver> drivers,
                       double T, const SolveConfig& cfg);

}  // namespace gconv
