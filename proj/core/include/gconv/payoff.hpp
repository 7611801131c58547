#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gconv/payoff_expr.hpp"

namespace gconv {

/// Payoff phi(B_{t1}-B_{t0}, ..., B_{tm}-B_{tm-1}) observed through finitely
/// many increments of the canonical path, with 0 = t0 < t1 < ... < tm.
///
/// phi carries a declared growth envelope; evaluators rely on it to size
/// spatial grids. The envelope is trusted but spot-checked by property tests.
class CylinderPayoff {
  public:
    using Fn = std::function<double(std::span<const double>)>;

    /// times = {t1, ..., tm}, strictly increasing, t1 > 0.
    CylinderPayoff(std::vector<double> times, Fn phi, GrowthEnvelope envelope);

    /// Coordinates of the expression are the increments themselves.
    static CylinderPayoff from_expr(const PayoffExpr& e, std::vector<double> times);

    /// Coordinates of the expression are the levels B_{t1}, ..., B_{tm};
    /// precomposes with the cumulative-sum map so the engine's native
    /// increment coordinates are preserved.
    static CylinderPayoff from_expr_levels(const PayoffExpr& e, std::vector<double> times);

    int m() const { return static_cast<int>(times_.size()); }
    const std::vector<double>& times() const { return times_; }

    /// t_{j+1} - t_j with t_0 = 0, for 0 <= j < m.
    double duration(int j) const;

    double horizon() const { return times_.back(); }

    double phi(std::span<const double> increments) const { return phi_(increments); }

    const GrowthEnvelope& envelope() const { return envelope_; }

  private:
    std::vector<double> times_;
    Fn phi_;
    GrowthEnvelope envelope_;
};

}  // namespace gconv
