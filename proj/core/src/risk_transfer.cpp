#include "gconv/risk_transfer.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace gconv {

namespace {

CylinderPayoff negate(const CylinderPayoff& X) {
    return CylinderPayoff(
        X.times(), [X](std::span<const double> inc) { return -X.phi(inc); }, X.envelope());
}

}  // namespace

double rho(const CylinderPayoff& X, const Driver& d, const SolveConfig& cfg) {
    return evaluate(negate(X), d, cfg);
}

TransferQuote optimal_transfer(const CylinderPayoff& X, const Driver& d_A, const Driver& d_B,
                               const TheoremSettings& cfg) {
    TransferQuote quote;
    quote.rho_A_no_transfer = rho(X, d_A, cfg.solve);

    if (convolve_drivers(d_A, d_B).is_degenerate()) {
        quote.degenerate = true;
        quote.value = -std::numeric_limits<double>::infinity();
        const double lambdas[] = {1.0, 2.0, 4.0, 8.0};
        quote.divergence = detect_divergence(d_A, d_B, X.horizon(), lambdas, cfg.solve);
        return quote;
    }

    InfConvProblem p(d_A, d_B, negate(X));
    if (cfg.control_points > 0) p.control_points = cfg.control_points;
    p.partition_levels = cfg.partition_levels;
    p.optimizer = cfg.optimizer;
    p.solve = cfg.solve;

    quote.diagnostics = minimize(p);
    quote.value = quote.diagnostics.best_j;
    quote.contract = quote.diagnostics.best;

    // F = -psi priced by B: rho_B(F) = E_B[sum of psi's stages], so the
    // bound is its negative.
    quote.price_bound = -contract_expectation(quote.contract, d_B, p.solve);
    return quote;
}

}  // namespace gconv
