#include "gconv/gheat.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace gconv {

void validate(const SolveConfig& cfg) {
    if (cfg.truncation_multiple < 4)
        throw std::invalid_argument("truncation multiple must be at least 4");
    if (cfg.n_points < 3 || cfg.n_points % 2 == 0)
        throw std::invalid_argument("n_points must be odd and at least 3");
    if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
        throw std::invalid_argument("cfl_safety must lie in (0, 1]");
    if (cfg.quad_order < 16)
        throw std::invalid_argument("quad_order must be at least 16");
    if (cfg.step_budget < 1)
        throw std::invalid_argument("step budget must be positive");
}

TimeStepping plan_time_stepping(double t_end, double dx, double sigma_hi,
                                const SolveConfig& cfg) {
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
        throw std::invalid_argument("duration must be finite and non-negative");
    if (t_end == 0.0) return {0.0, 0.0, 0};
    long long n_steps = 1;
    if (sigma_hi > 0.0) {
        double dt_max = cfg.cfl_safety * dx * dx / (sigma_hi * sigma_hi);
        n_steps = static_cast<long long>(std::ceil(t_end / dt_max));
        if (n_steps < 1) n_steps = 1;
    }
    if (n_steps > cfg.step_budget)
        throw std::invalid_argument(
            "CFL plan needs " + std::to_string(n_steps) + " steps, over the budget of " +
            std::to_string(cfg.step_budget) + "; coarsen the grid or shorten the horizon");
    return {t_end, t_end / static_cast<double>(n_steps), n_steps};
}

GridFunction solve(const Driver& d, const GridFunction& phi, double t,
                   const SolveConfig& cfg) {
    validate(cfg);
    const SpatialGrid& grid = phi.grid();
    TimeStepping plan = plan_time_stepping(t, grid.dx(), d.sigma_hi(), cfg);
    if (plan.n_steps == 0) return phi;

    // Second differences are folded into the coefficients: for d2 in raw
    // (undivided) form, u' = u + a_pos * max(d2, 0) - a_neg * max(-d2, 0).
    const double inv = plan.dt / (grid.dx() * grid.dx());
    const double a_pos = 0.5 * d.sigma_hi() * d.sigma_hi() * inv;
    const double a_neg = 0.5 * d.sigma_lo() * d.sigma_lo() * inv;

    std::vector<double> u = phi.values();
    std::vector<double> next(u.size());
    const std::size_t n = u.size();
    for (long long step = 0; step < plan.n_steps; ++step) {
        next[0] = u[0];
        next[n - 1] = u[n - 1];
        for (std::size_t j = 1; j + 1 < n; ++j) {
            double d2 = u[j + 1] - 2.0 * u[j] + u[j - 1];
            next[j] = u[j] + (d2 >= 0.0 ? a_pos : a_neg) * d2;
        }
        u.swap(next);
        if ((step & 1023) == 1023 && !std::isfinite(u[n / 2]))
            throw std::runtime_error(
                "solution became non-finite during stepping; domain too small for the payoff's growth");
    }
    for (double v : u)
        if (!std::isfinite(v))
            throw std::runtime_error(
                "solution became non-finite during stepping; domain too small for the payoff's growth");
    return GridFunction(grid, std::move(u));
}

namespace {

// E[Z^p 1_{Z>a}] for standard normal Z: T_0 = erfc(a/sqrt(2))/2,
// T_1 = pdf(a), T_p = a^{p-1} pdf(a) + (p-1) T_{p-2}.
double upper_moment(int p, double a) {
    const double two_pi = 8.0 * std::atan(1.0);
    const double pdf = std::exp(-0.5 * a * a) / std::sqrt(two_pi);
    if (p == 0) return 0.5 * std::erfc(a / std::sqrt(2.0));
    if (p == 1) return pdf;
    return std::pow(a, p - 1) * pdf + static_cast<double>(p - 1) * upper_moment(p - 2, a);
}

// Mass of the envelope bound C (1 + |x|^m) |x| beyond +-L under N(0, s^2).
double tail_mass(const GrowthEnvelope& env, double s, double L) {
    if (s <= 0.0) return 0.0;
    double a = L / s;
    return 2.0 * env.C * (s * upper_moment(1, a) + std::pow(s, env.m + 1) * upper_moment(env.m + 1, a));
}

}  // namespace

SpatialGrid build_grid(const GrowthEnvelope& envelope, std::span<const Driver> drivers,
                       double T, const SolveConfig& cfg) {
    validate(cfg);
    if (drivers.empty()) throw std::invalid_argument("build_grid needs at least one driver");
    if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
    double sigma_hi = 0.0;
    for (const Driver& d : drivers) sigma_hi = std::max(sigma_hi, d.sigma_hi());

    const double spread = sigma_hi * std::sqrt(T);
    double half_width = std::max(static_cast<double>(cfg.truncation_multiple) * spread, 1.0);
    for (int doubling = 0; doubling <= 3; ++doubling) {
        double mass = tail_mass(envelope, spread, half_width);
        if (std::isfinite(mass) && mass <= 1e-6)
            return SpatialGrid(half_width, cfg.n_points);
        half_width *= 2.0;
    }
    throw std::invalid_argument("payoff growth too strong for configured grid budget");
}

}  // namespace gconv
