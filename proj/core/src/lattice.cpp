#include "gconv/lattice.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gconv/parallel.hpp"

namespace gconv {

namespace {

struct StepWeights {
    double up = 0.0;
    double mid = 0.0;
};

StepWeights weights_for(double sigma, double dt, double dz) {
    StepWeights w;
    w.up = sigma * sigma * dt / (2.0 * dz * dz);
    w.mid = 1.0 - sigma * sigma * dt / (dz * dz);
    if (w.up < 0.0 || w.mid < 0.0) {
        throw std::invalid_argument(
            "trinomial transition probabilities are negative for sigma=" + std::to_string(sigma) +
            "; spacing requires dz^2 >= hi^2 * dt");
    }
    return w;
}

// One backward layer over relative node values: shrinks the array by one node
// on each side. values has 2*levels+1 entries centered on relative node 0.
void step_back(std::vector<double>& values, const StepWeights& lo, const StepWeights& hi,
               bool classical) {
    const std::size_t n = values.size();
    for (std::size_t r = 1; r + 1 < n; ++r) {
        double eh = hi.up * (values[r + 1] + values[r - 1]) + hi.mid * values[r];
        if (!classical) {
            double el = lo.up * (values[r + 1] + values[r - 1]) + lo.mid * values[r];
            if (el > eh) eh = el;
        }
        values[r - 1] = eh;
    }
    values.resize(n - 2);
}

}  // namespace

LatticeResult evaluate_lattice(const CylinderPayoff& X, const Driver& d, int n_time_steps) {
    if (n_time_steps < 1) throw std::invalid_argument("n_time_steps must be positive");
    const int m = X.m();
    const double T = X.horizon();
    const double dt = T / n_time_steps;

    LatticeResult out;
    out.snap_distances.resize(static_cast<std::size_t>(m));

    // Deterministic band: the path never moves, the payoff is read at zero.
    if (d.sigma_hi() == 0.0) {
        std::vector<double> zeros(static_cast<std::size_t>(m), 0.0);
        out.value = X.phi(zeros);
        for (int j = 0; j < m; ++j) {
            out.snap_distances[static_cast<std::size_t>(j)] = 0.0;
        }
        return out;
    }

    const double dz = d.sigma_hi() * std::sqrt(3.0 * dt);
    const StepWeights w_lo = weights_for(d.sigma_lo(), dt, dz);
    const StepWeights w_hi = weights_for(d.sigma_hi(), dt, dz);
    const bool classical = d.sigma_lo() == d.sigma_hi();

    // Snap payoff times to layers; every increment needs at least one layer.
    std::vector<int> layer(static_cast<std::size_t>(m) + 1, 0);
    for (int j = 0; j < m; ++j) {
        const double t = X.times()[static_cast<std::size_t>(j)];
        int l = static_cast<int>(std::lround(t / dt));
        if (l < 0) l = 0;
        if (l > n_time_steps) l = n_time_steps;
        layer[static_cast<std::size_t>(j) + 1] = l;
        out.snap_distances[static_cast<std::size_t>(j)] = std::abs(t - l * dt);
        if (l <= layer[static_cast<std::size_t>(j)]) {
            throw std::invalid_argument(
                "lattice too coarse: payoff times snap to the same layer; raise n_time_steps");
        }
    }

    std::vector<int> seg_levels(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        seg_levels[static_cast<std::size_t>(j)] =
            layer[static_cast<std::size_t>(j) + 1] - layer[static_cast<std::size_t>(j)];
    }

    // Increment j takes values r*dz with |r| <= seg_levels[j]; one state per
    // combination of realized earlier increments. Sizes of the prefix tables:
    std::vector<std::size_t> width(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        width[static_cast<std::size_t>(j)] =
            2 * static_cast<std::size_t>(seg_levels[static_cast<std::size_t>(j)]) + 1;
    }

    // table holds conditional values indexed by the first j increments
    // (row-major, last coordinate fastest); starts at j = m as the payoff
    // itself, ends at j = 0 as the single root value.
    std::vector<double> table;
    {
        std::size_t total = 1;
        for (int j = 0; j < m; ++j) total *= width[static_cast<std::size_t>(j)];
        table.resize(total);
        const std::size_t last = width[static_cast<std::size_t>(m) - 1];
        parallel_for(total / last, [&](std::size_t p) {
            std::vector<double> args(static_cast<std::size_t>(m));
            std::size_t rest = p;
            for (int k = m - 2; k >= 0; --k) {
                const std::size_t wk = width[static_cast<std::size_t>(k)];
                const std::size_t idx = rest % wk;
                args[static_cast<std::size_t>(k)] =
                    (static_cast<double>(idx) - static_cast<double>(seg_levels[static_cast<std::size_t>(k)])) * dz;
                rest /= wk;
            }
            for (std::size_t i = 0; i < last; ++i) {
                args[static_cast<std::size_t>(m) - 1] =
                    (static_cast<double>(i) - static_cast<double>(seg_levels[static_cast<std::size_t>(m) - 1])) * dz;
                table[p * last + i] = X.phi(args);
            }
        });
    }

    for (int j = m - 1; j >= 0; --j) {
        const std::size_t wj = width[static_cast<std::size_t>(j)];
        const std::size_t prefixes = table.size() / wj;
        std::vector<double> next(prefixes);
        parallel_for(prefixes, [&](std::size_t p) {
            std::vector<double> v(table.begin() + static_cast<std::ptrdiff_t>(p * wj),
                                  table.begin() + static_cast<std::ptrdiff_t>((p + 1) * wj));
            for (int l = 0; l < seg_levels[static_cast<std::size_t>(j)]; ++l) {
                step_back(v, w_lo, w_hi, classical);
            }
            next[p] = v[0];
        });
        table = std::move(next);
    }

    out.value = table[0];
    return out;
}

}  // namespace gconv
