#include "gconv/payoff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gconv {

CylinderPayoff::CylinderPayoff(std::vector<double> times, Fn phi, GrowthEnvelope envelope)
    : times_(std::move(times)), phi_(std::move(phi)), envelope_(envelope) {
    if (times_.empty()) throw std::invalid_argument("payoff needs at least one time point");
    double prev = 0.0;
    for (double t : times_) {
        if (!std::isfinite(t) || t <= prev)
            throw std::invalid_argument("payoff times must be finite and strictly increasing from 0");
        prev = t;
    }
    if (!phi_) throw std::invalid_argument("payoff function is empty");
    if (envelope_.C < 0.0 || envelope_.m < 0)
        throw std::invalid_argument("growth envelope must have C >= 0 and m >= 0");
}

double CylinderPayoff::duration(int j) const {
    if (j < 0 || j >= m()) throw std::out_of_range("stage index out of range");
    double t_prev = j == 0 ? 0.0 : times_[static_cast<std::size_t>(j - 1)];
    return times_[static_cast<std::size_t>(j)] - t_prev;
}

CylinderPayoff CylinderPayoff::from_expr(const PayoffExpr& e, std::vector<double> times) {
    if (e.arity() > static_cast<int>(times.size()))
        throw std::invalid_argument("expression references x" + std::to_string(e.arity()) +
                                    " but only " + std::to_string(times.size()) +
                                    " time points were given");
    return CylinderPayoff(
        std::move(times), [e](std::span<const double> incs) { return e.eval(incs); },
        e.envelope());
}

CylinderPayoff CylinderPayoff::from_expr_levels(const PayoffExpr& e, std::vector<double> times) {
    int m = static_cast<int>(times.size());
    if (m > 3) throw std::invalid_argument("level-coordinate payoffs support at most 3 time points");
    if (e.arity() > m)
        throw std::invalid_argument("expression references x" + std::to_string(e.arity()) +
                                    " but only " + std::to_string(times.size()) +
                                    " time points were given");
    // The cumulative-sum map scales distances by at most m per coordinate;
    // widen the envelope accordingly.
    GrowthEnvelope env = e.envelope();
    env.C *= static_cast<double>(m) * (1.0 + std::pow(static_cast<double>(m), env.m));
    return CylinderPayoff(
        std::move(times),
        [e, m](std::span<const double> incs) {
            double levels[3] = {0.0, 0.0, 0.0};
            double running = 0.0;
            for (int i = 0; i < m; ++i) {
                running += incs[static_cast<std::size_t>(i)];
                levels[i] = running;
            }
            return e.eval({levels, static_cast<std::size_t>(m)});
        },
        env);
}

}  // namespace gconv
