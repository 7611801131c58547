#pragma once

#include <vector>

#include "gconv/driver.hpp"
#include "gconv/payoff.hpp"

namespace gconv {

/// Root value of a trinomial evaluation plus how far each payoff time had to
/// move to land on a lattice layer (times are snapped to the nearest layer).
struct LatticeResult {
    double value = 0.0;
    std::vector<double> snap_distances;
};

/// Brute-force oracle, independent of the PDE engine: backward dynamic
/// programming on a recombining trinomial tree, maximizing the one-step
/// expectation over the extreme volatilities {lo, hi} at every node. The
/// extremes suffice because the driver is piecewise linear in the curvature,
/// so interior volatilities are never strictly optimal.
///
/// Spacing dz = hi * sqrt(3 dt) keeps both transition triples on one node
/// set; the center weight absorbs the variance deficit when stepping with
/// lo. One-step probabilities p_pm = sigma^2 dt / (2 dz^2) and
/// p_0 = 1 - sigma^2 dt / dz^2 must be nonnegative (config error otherwise).
///
/// Multi-increment payoffs carry one dynamic-programming state per visited
/// increment combination on the lattice's observation-layer grid; cost grows
/// with the product of segment widths, so keep n_time_steps moderate for
/// m >= 2.
///
/// Throws std::invalid_argument when n_time_steps is too small for the
/// payoff's times (two times snapping to one layer) or a probability turns
/// negative.
LatticeResult evaluate_lattice(const CylinderPayoff& X, const Driver& d, int n_time_steps);

}  // namespace gconv
