#pragma once

#include <optional>

#include "gconv/driver.hpp"
#include "gconv/gexpectation.hpp"
#include "gconv/gheat.hpp"
#include "gconv/infconv.hpp"
#include "gconv/payoff.hpp"

namespace gconv {

/// Coherent risk of holding X under band d: rho(X) = E[-X].
double rho(const CylinderPayoff& X, const Driver& d, const SolveConfig& cfg = {});

/// Two-agent optimal risk transfer. Agent A holds X under band d_A and cedes
/// a contract F to agent B (band d_B), minimizing rho_A(X - F) + rho_B(F).
/// Substituting psi = -F turns the objective into the transfer functional of
/// the payoff -X, so the quote is one minimize() run in disguise.
struct TransferQuote {
    /// inf over F of rho_A(X - F) + rho_B(F).
    double value = 0.0;
    /// rho_A(X): the no-transfer benchmark. value never exceeds it.
    double rho_A_no_transfer = 0.0;
    /// Best transfer variable psi found; the ceded contract is F = -psi.
    Contract contract;
    /// Largest premium pi with rho_B(F - pi) <= 0, i.e. -rho_B(F).
    double price_bound = 0.0;
    OptimizerTrace diagnostics;
    /// Disjoint bands: value is -inf and the slope report below replaces the
    /// contract and price fields.
    bool degenerate = false;
    std::optional<DivergenceReport> divergence;
};

/// cfg.tol_theorem/tol_lower are unused here; control_points <= 0 keeps the
/// problem default.
TransferQuote optimal_transfer(const CylinderPayoff& X, const Driver& d_A, const Driver& d_B,
                               const TheoremSettings& cfg = {});

}  // namespace gconv
