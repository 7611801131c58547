#include "gconv/gexpectation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gconv/parallel.hpp"

namespace gconv {

namespace {

int make_odd(int n) { return n % 2 == 0 ? n + 1 : n; }

}  // namespace

int tensor_points(int n_points, int m) {
    if (m <= 1) return n_points;
    int shrink = m == 2 ? 4 : 16;
    int floor_n = std::min(201, n_points);
    return make_odd(std::max(floor_n, n_points / shrink));
}

namespace {

struct Recursion {
    const CylinderPayoff& X;
    const Driver& d;
    SolveConfig cfg;                 // n_points already set to the tensor budget
    std::vector<SpatialGrid> grids;  // one per stage

    Recursion(const CylinderPayoff& payoff, const Driver& driver, const SolveConfig& base)
        : X(payoff), d(driver), cfg(base) {
        check_m();
        cfg.n_points = tensor_points(base.n_points, payoff.m());
        grids.reserve(static_cast<std::size_t>(payoff.m()));
        const Driver one[] = {driver};
        for (int j = 0; j < payoff.m(); ++j)
            grids.push_back(build_grid(payoff.envelope(), one, payoff.duration(j), cfg));
    }

    // Every stage pinned to one caller grid; no per-stage sizing, no tensor
    // budget shrink. Evaluations that must share a discretization exactly
    // (the inf-convolution functional) go through this form.
    Recursion(const CylinderPayoff& payoff, const Driver& driver, const SolveConfig& base,
              const SpatialGrid& pinned)
        : X(payoff), d(driver), cfg(base) {
        check_m();
        cfg.n_points = static_cast<int>(pinned.n_points());
        grids.assign(static_cast<std::size_t>(payoff.m()), pinned);
    }

    void check_m() const {
        if (X.m() > 3)
            throw std::invalid_argument("payoff has " + std::to_string(X.m()) +
                                        " time points; the tensor recursion supports at most 3");
    }

    // psi_j tensor over the first j stage grids, row-major with the last
    // coordinate fastest. j >= 1.
    std::vector<double> level(int j) const {
        const int m = X.m();
        const std::size_t n = static_cast<std::size_t>(cfg.n_points);

        std::size_t outer = 1;
        for (int k = 0; k + 1 < m; ++k) outer *= n;

        // psi_{m-1}: one terminal-stage solve per tensor point of the first
        // m-1 grids; the terminal row is built from phi on the fly.
        std::vector<double> current(std::max<std::size_t>(outer, 1));
        const SpatialGrid& last = grids[static_cast<std::size_t>(m - 1)];
        parallel_for(current.size(), [&](std::size_t flat) {
            double args[3] = {0.0, 0.0, 0.0};
            std::size_t rest = flat;
            for (int k = m - 2; k >= 0; --k) {
                args[k] = grids[static_cast<std::size_t>(k)].x(rest % n);
                rest /= n;
            }
            std::vector<double> row(n);
            for (std::size_t i = 0; i < n; ++i) {
                args[m - 1] = last.x(i);
                row[i] = X.phi({args, static_cast<std::size_t>(m)});
            }
            GridFunction sol = solve(d, GridFunction(last, std::move(row)), X.duration(m - 1), cfg);
            current[flat] = sol.value_at_center();
        });

        for (int lvl = m - 1; lvl > j; --lvl) {
            std::size_t rows = 1;
            for (int k = 0; k + 1 < lvl; ++k) rows *= n;
            std::vector<double> next(rows);
            const SpatialGrid& g = grids[static_cast<std::size_t>(lvl - 1)];
            parallel_for(rows, [&](std::size_t r) {
                std::vector<double> row(current.begin() + static_cast<std::ptrdiff_t>(r * n),
                                        current.begin() + static_cast<std::ptrdiff_t>((r + 1) * n));
                GridFunction sol = solve(d, GridFunction(g, std::move(row)), X.duration(lvl - 1), cfg);
                next[r] = sol.value_at_center();
            });
            current.swap(next);
        }
        return current;
    }

    double value() const {
        if (X.m() == 1) {
            GridFunction data = GridFunction::sample(
                grids[0], [this](double x) { return X.phi({&x, 1}); });
            return solve(d, data, X.duration(0), cfg).value_at_center();
        }
        std::vector<double> psi1 = level(1);
        return solve(d, GridFunction(grids[0], std::move(psi1)), X.duration(0), cfg)
            .value_at_center();
    }
};

double evaluate_at(const CylinderPayoff& X, const Driver& d, const SolveConfig& cfg) {
    return Recursion(X, d, cfg).value();
}

}  // namespace

double evaluate(const CylinderPayoff& X, const Driver& d, const SolveConfig& cfg) {
    validate(cfg);
    return evaluate_at(X, d, cfg);
}

double evaluate_on_grid(const CylinderPayoff& X, const Driver& d, const SpatialGrid& grid,
                        const SolveConfig& cfg) {
    return Recursion(X, d, cfg, grid).value();
}

EvalReport evaluate_report(const CylinderPayoff& X, const Driver& d, const SolveConfig& cfg) {
    validate(cfg);
    EvalReport report;
    report.value = evaluate_at(X, d, cfg);
    report.config = cfg;
    SolveConfig half = cfg;
    half.n_points = make_odd((cfg.n_points - 1) / 2 + 1);
    report.error_estimate = std::fabs(report.value - evaluate_at(X, d, half));
    return report;
}

double ConditionalResult::eval(std::span<const double> increments) const {
    if (static_cast<int>(increments.size()) < j_)
        throw std::invalid_argument("conditional value needs " + std::to_string(j_) +
                                    " increments");
    if (j_ == 0) return scalar_;
    if (exact_) return exact_(increments);

    // Multilinear interpolation with linear extension outside each grid.
    const int j = j_;
    const std::size_t n = static_cast<std::size_t>(grids_[0].n_points());
    int base[3] = {0, 0, 0};
    double w[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < j; ++k) {
        const SpatialGrid& g = grids_[static_cast<std::size_t>(k)];
        double s = increments[static_cast<std::size_t>(k)] / g.dx() +
                   static_cast<double>(g.n_points() / 2);
        double f = std::floor(s);
        int i = static_cast<int>(f);
        const int top = static_cast<int>(g.n_points()) - 2;
        if (i < 0) i = 0;
        if (i > top) i = top;
        base[k] = i;
        w[k] = s - static_cast<double>(i);
    }
    double out = 0.0;
    for (int corner = 0; corner < (1 << j); ++corner) {
        double weight = 1.0;
        std::size_t flat = 0;
        for (int k = 0; k < j; ++k) {
            int bit = (corner >> k) & 1;
            weight *= bit ? w[k] : 1.0 - w[k];
            flat = flat * n + static_cast<std::size_t>(base[k] + bit);
        }
        out += weight * values_[flat];
    }
    return out;
}

GridFunction ConditionalResult::as_grid_function() const {
    if (j_ != 1 || values_.empty())
        throw std::logic_error("only j = 1 conditionals convert to a grid function");
    return GridFunction(grids_[0], values_);
}

ConditionalResult conditional(const CylinderPayoff& X, const Driver& d, int j,
                              const SolveConfig& cfg) {
    validate(cfg);
    if (j < 0 || j > X.m())
        throw std::out_of_range("conditioning index must lie in [0, m]");
    ConditionalResult out;
    out.j_ = j;
    if (j == X.m()) {
        out.exact_ = [X](std::span<const double> incs) { return X.phi(incs); };
        return out;
    }
    Recursion rec(X, d, cfg);
    if (j == 0) {
        out.scalar_ = rec.value();
        return out;
    }
    out.values_ = rec.level(j);
    out.grids_.assign(rec.grids.begin(), rec.grids.begin() + j);
    return out;
}

std::pair<double, double> stationarity_check(const std::function<double(double)>& phi,
                                             const GrowthEnvelope& envelope, const Driver& d,
                                             double s, double t, const SolveConfig& cfg) {
    validate(cfg);
    if (!(0.0 <= s && s < t))
        throw std::invalid_argument("stationarity probe needs 0 <= s < t");
    // Both sides run at the two-stage tensor budget so the terminal-stage
    // solves share one grid.
    SolveConfig shared = cfg;
    shared.n_points = tensor_points(cfg.n_points, 2);

    double increment_value;
    if (s == 0.0) {
        CylinderPayoff direct({t}, [phi](std::span<const double> incs) { return phi(incs[0]); },
                              envelope);
        increment_value = evaluate_at(direct, d, shared);
    } else {
        CylinderPayoff skip_first(
            {s, t}, [phi](std::span<const double> incs) { return phi(incs[1]); }, envelope);
        increment_value = evaluate_at(skip_first, d, shared);
    }
    CylinderPayoff shifted({t - s}, [phi](std::span<const double> incs) { return phi(incs[0]); },
                           envelope);
    return {increment_value, evaluate_at(shifted, d, shared)};
}

}  // namespace gconv
