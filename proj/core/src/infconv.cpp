#include "gconv/infconv.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gconv {

namespace {

// Piecewise-linear value with linear extension; matches
// GridFunction::operator() so contracts interpolate identically everywhere.
double pl_eval(const SpatialGrid& g, std::span<const double> v, double x) {
    const double s = x / g.dx() + static_cast<double>(g.center());
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(std::floor(s));
    const std::ptrdiff_t top = static_cast<std::ptrdiff_t>(g.n_points()) - 2;
    if (i < 0) i = 0;
    if (i > top) i = top;
    const double w = s - static_cast<double>(i);
    const auto ui = static_cast<std::size_t>(i);
    return v[ui] + w * (v[ui + 1] - v[ui]);
}

double max_abs(const Contract& f) {
    double out = 0.0;
    for (const auto& stage : f.stage_values)
        for (double v : stage) out = std::max(out, std::fabs(v));
    return out;
}

}  // namespace

Contract Contract::zero(const SpatialGrid& control, std::vector<double> stage_times) {
    Contract f;
    f.control = control;
    f.stage_times = std::move(stage_times);
    f.stage_values.assign(f.stage_times.size(), std::vector<double>(control.n_points(), 0.0));
    f.rank = 1;
    return f;
}

Contract Contract::zero_tensor(const SpatialGrid& control, double t1, double t2) {
    Contract f;
    f.control = control;
    f.stage_times = {t1, t2};
    f.stage_values.assign(1, std::vector<double>(control.n_points() * control.n_points(), 0.0));
    f.rank = 2;
    return f;
}

double Contract::eval(std::span<const double> coords) const {
    if (rank == 1) {
        if (coords.size() < stage_values.size())
            throw std::invalid_argument("contract needs one coordinate per stage");
        double out = 0.0;
        for (std::size_t k = 0; k < stage_values.size(); ++k)
            out += pl_eval(control, stage_values[k], coords[k]);
        return out;
    }
    if (coords.size() < 2) throw std::invalid_argument("tensor contract needs two coordinates");
    const std::size_t n = control.n_points();
    const auto& v = stage_values[0];
    const double s = coords[0] / control.dx() + static_cast<double>(control.center());
    std::ptrdiff_t r = static_cast<std::ptrdiff_t>(std::floor(s));
    const std::ptrdiff_t top = static_cast<std::ptrdiff_t>(n) - 2;
    if (r < 0) r = 0;
    if (r > top) r = top;
    const double w = s - static_cast<double>(r);
    const auto ur = static_cast<std::size_t>(r);
    const double a = pl_eval(control, {v.data() + ur * n, n}, coords[1]);
    const double b = pl_eval(control, {v.data() + (ur + 1) * n, n}, coords[1]);
    return a + w * (b - a);
}

void Contract::gauge_fix() {
    const std::size_t c = control.center();
    for (auto& stage : stage_values) {
        const double offset =
            rank == 2 ? stage[c * control.n_points() + c] : stage[c];
        for (double& v : stage) v -= offset;
    }
}

void Contract::to_csv(std::ostream& out) const {
    const auto prev = out.precision(17);
    const std::size_t n = control.n_points();
    if (rank == 2) {
        out << "x1,x2,psi\n";
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t i = 0; i < n; ++i)
                out << control.x(r) << ',' << control.x(i) << ',' << stage_values[0][r * n + i]
                    << '\n';
    } else {
        out << 'x';
        if (stage_values.size() == 1) {
            out << ",psi\n";
        } else {
            for (std::size_t k = 1; k <= stage_values.size(); ++k) out << ",psi_" << k;
            out << '\n';
        }
        for (std::size_t i = 0; i < n; ++i) {
            out << control.x(i);
            for (const auto& stage : stage_values) out << ',' << stage[i];
            out << '\n';
        }
    }
    out.precision(prev);
}

InfConvProblem::InfConvProblem(Driver first, Driver second, CylinderPayoff payoff)
    : d1(first),
      d2(second),
      X(std::move(payoff)),
      contract_time(X.horizon()),
      control_points(X.m() == 2 ? 9 : 41) {}

namespace {

int contract_index(const InfConvProblem& p) {
    for (int j = 0; j < p.X.m(); ++j) {
        const double t = p.X.times()[static_cast<std::size_t>(j)];
        if (std::fabs(t - p.contract_time) <= 1e-9 * std::max(1.0, std::fabs(t))) return j;
    }
    throw std::invalid_argument("contract time must be one of the payoff's time points");
}

}  // namespace

void validate(const InfConvProblem& p) {
    validate(p.solve);
    contract_index(p);
    if (p.control_points < 3 || p.control_points % 2 == 0)
        throw std::invalid_argument("control grid needs an odd node count >= 3 (x = 0 is the gauge node)");
    if (p.partition_levels < 1)
        throw std::invalid_argument("partition_levels must be >= 1");
    if (p.partition_levels > 1 && p.X.m() != 1)
        throw std::invalid_argument(
            "stage partitions refine single-increment payoffs only; multi-increment payoffs use "
            "their own coordinates");
    const OptimizerSettings& o = p.optimizer;
    if (o.max_iters < 0 || !(o.tolerance > 0.0) || !(o.initial_step > 0.0) ||
        !(o.step_decay > 0.0) || !(o.step_decay < 1.0) || !(o.min_step > 0.0))
        throw std::invalid_argument("optimizer settings out of range");
}

SpatialGrid problem_grid(const InfConvProblem& p) {
    GrowthEnvelope env = p.X.envelope();
    env.C = 2.0 * env.C + 1.0;  // headroom for the contract's own linear growth
    env.m = std::max(env.m, 1);
    const Driver bands[] = {p.d1, p.d2};
    SolveConfig cfg = p.solve;
    if (p.X.m() > 1) cfg.n_points = tensor_points(p.solve.n_points, p.X.m());
    return build_grid(env, bands, p.X.horizon(), cfg);
}

SpatialGrid control_grid(const InfConvProblem& p) {
    const SpatialGrid pde = problem_grid(p);
    return SpatialGrid(pde.x_max() / 2.0, static_cast<std::size_t>(p.control_points));
}

namespace {

// Per-problem evaluation state: the shared PDE grid, the control grid, and
// the payoff samples. Every functional evaluation of the problem goes
// through one Engine instance, so all of them share one discretization.
class Engine {
  public:
    explicit Engine(const InfConvProblem& p)
        : p_(p), pde_(problem_grid(p)), ctrl_(control_grid(p)), ct_index_(contract_index(p)) {
        rank_ = (p.X.m() == 2 && ct_index_ == 1) ? 2 : 1;
        if (rank_ == 1) {
            if (p.X.m() == 1) {
                const int K = p.partition_levels;
                stage_times_.reserve(static_cast<std::size_t>(K));
                for (int k = 1; k <= K; ++k)
                    stage_times_.push_back(p.contract_time * (static_cast<double>(k) / K));
            } else {
                stage_times_ = {p.contract_time};
            }
        }
        if (p.X.m() == 1) {
            phi_pde_.resize(pde_.n_points());
            for (std::size_t i = 0; i < pde_.n_points(); ++i) {
                const double x = pde_.x(i);
                phi_pde_[i] = p.X.phi({&x, 1});
            }
        }
    }

    const SpatialGrid& pde() const { return pde_; }

    Contract zero_contract() const {
        if (rank_ == 2)
            return Contract::zero_tensor(ctrl_, p_.X.times()[0], p_.X.times()[1]);
        return Contract::zero(ctrl_, stage_times_);
    }

    int rank() const { return rank_; }

    double J(const Contract& f) const {
        if (f.rank == 1 && p_.X.m() == 1) return chain(f);
        return wrapped(f);
    }

    // Warm starts: zero, the payoff as a final-stage contract, half of it,
    // and the constructive curvature split (single-increment payoffs).
    std::vector<Contract> starts(const Driver& convolved) const {
        std::vector<Contract> out;
        out.push_back(zero_contract());
        if (rank_ == 2) {
            Contract full = zero_contract();
            const std::size_t n = ctrl_.n_points();
            auto& v = full.stage_values[0];
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double args[2] = {ctrl_.x(r), ctrl_.x(i)};
                    v[r * n + i] = p_.X.phi(args);
                }
            }
            full.gauge_fix();
            push_with_half(out, std::move(full));
        } else if (p_.X.m() == 1) {
            Contract full = zero_contract();
            auto& v = full.stage_values.back();
            for (std::size_t i = 0; i < ctrl_.n_points(); ++i) {
                const double x = ctrl_.x(i);
                v[i] = p_.X.phi({&x, 1});
            }
            full.gauge_fix();
            push_with_half(out, std::move(full));
            if (auto split = curvature_split(convolved)) out.push_back(std::move(*split));
        }
        return out;
    }

  private:
    static void push_with_half(std::vector<Contract>& out, Contract full) {
        Contract half = full;
        for (auto& stage : half.stage_values)
            for (double& v : stage) v *= 0.5;
        out.push_back(std::move(full));
        out.push_back(std::move(half));
    }

    std::vector<double> sample_stage(const Contract& f, std::size_t k) const {
        std::vector<double> out(pde_.n_points());
        for (std::size_t i = 0; i < pde_.n_points(); ++i)
            out[i] = pl_eval(f.control, f.stage_values[k], pde_.x(i));
        return out;
    }

    void axpy_stage(const Contract& f, std::size_t k, double sign, std::vector<double>& v) const {
        for (std::size_t i = 0; i < pde_.n_points(); ++i)
            v[i] += sign * pl_eval(f.control, f.stage_values[k], pde_.x(i));
    }

    // E2[F] and E1[X - F] as one backward pass each: conditioning at a stage
    // time peels the stage's own term off as a constant, so the stage
    // functions enter additively between the solves.
    double chain(const Contract& f) const {
        const int K = f.stages();
        const double delta = f.stage_times.back() / K;

        std::vector<double> w = sample_stage(f, static_cast<std::size_t>(K - 1));
        for (int k = K - 1; k >= 1; --k) {
            GridFunction sol = solve(p_.d2, GridFunction(pde_, std::move(w)), delta, p_.solve);
            w = std::move(sol.values());
            axpy_stage(f, static_cast<std::size_t>(k - 1), 1.0, w);
        }
        const double e2 =
            solve(p_.d2, GridFunction(pde_, std::move(w)), delta, p_.solve).value_at_center();

        std::vector<double> v = phi_pde_;
        axpy_stage(f, static_cast<std::size_t>(K - 1), -1.0, v);
        for (int k = K - 1; k >= 1; --k) {
            GridFunction sol = solve(p_.d1, GridFunction(pde_, std::move(v)), delta, p_.solve);
            v = std::move(sol.values());
            axpy_stage(f, static_cast<std::size_t>(k - 1), -1.0, v);
        }
        const double e1 =
            solve(p_.d1, GridFunction(pde_, std::move(v)), delta, p_.solve).value_at_center();
        return e1 + e2;
    }

    // Multi-increment payoffs: both terms as pinned-grid evaluations of
    // wrapped payoffs.
    double wrapped(const Contract& f) const {
        const double cf = max_abs(f) + 1.0;
        const GrowthEnvelope env_minus{p_.X.envelope().C + cf, std::max(p_.X.envelope().m, 1)};
        const GrowthEnvelope env_alone{cf, 1};
        const int idx = ct_index_;

        CylinderPayoff minus(
            p_.X.times(),
            [X = p_.X, f, idx](std::span<const double> inc) {
                if (f.rank == 2) {
                    const double c[2] = {inc[0], inc[1]};
                    return X.phi(inc) - f.eval(c);
                }
                double level = 0.0;
                for (int i = 0; i <= idx; ++i) level += inc[static_cast<std::size_t>(i)];
                return X.phi(inc) - f.eval({&level, 1});
            },
            env_minus);
        const double e1 = evaluate_on_grid(minus, p_.d1, pde_, p_.solve);

        if (f.rank == 2) {
            CylinderPayoff alone(
                p_.X.times(), [f](std::span<const double> inc) { return f.eval(inc); },
                env_alone);
            return e1 + evaluate_on_grid(alone, p_.d2, pde_, p_.solve);
        }
        CylinderPayoff alone(
            {p_.contract_time},
            [f](std::span<const double> inc) { return f.eval({inc.data(), 1}); }, env_alone);
        return e1 + evaluate_on_grid(alone, p_.d2, pde_, p_.solve);
    }

    // Twice-integrated selected-sign part of the discrete second derivative,
    // gauged to value 0 and slope 0 at the center. Splitting u by curvature
    // sign and transferring one part is exact for purely convex or purely
    // concave data and near-optimal in between.
    std::vector<double> curvature_part(const std::vector<double>& u, bool take_neg,
                                       bool take_pos) const {
        const std::size_t n = pde_.n_points();
        const std::size_t c = pde_.center();
        const double dx = pde_.dx();
        std::vector<double> keep(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
            keep[i] = (take_neg ? std::min(d2, 0.0) : 0.0) + (take_pos ? std::max(d2, 0.0) : 0.0);
        }
        keep[0] = keep[1];
        keep[n - 1] = keep[n - 2];

        std::vector<double> slope(n, 0.0);
        for (std::size_t j = c; j + 1 < n; ++j)
            slope[j + 1] = slope[j] + 0.5 * (keep[j] + keep[j + 1]) * dx;
        for (std::size_t j = c; j > 0; --j)
            slope[j - 1] = slope[j] - 0.5 * (keep[j] + keep[j - 1]) * dx;
        std::vector<double> w(n, 0.0);
        for (std::size_t j = c; j + 1 < n; ++j)
            w[j + 1] = w[j] + 0.5 * (slope[j] + slope[j + 1]) * dx;
        for (std::size_t j = c; j > 0; --j)
            w[j - 1] = w[j] - 0.5 * (slope[j] + slope[j - 1]) * dx;
        return w;
    }

    void restrict_to_control(const std::vector<double>& fine, std::vector<double>& coarse) const {
        for (std::size_t i = 0; i < ctrl_.n_points(); ++i)
            coarse[i] = pl_eval(pde_, fine, ctrl_.x(i));
    }

    // Constructive start: rebuild the convolved band's stage values U_k,
    // split each by curvature sign, hand the second band the sign it prices
    // closer to the intersection, and peel the running sum into per-stage
    // functions so the E2 chain reproduces the split values exactly.
    std::optional<Contract> curvature_split(const Driver& convolved) const {
        const bool take_neg = p_.d2.sigma_lo() > p_.d1.sigma_lo();
        const bool take_pos = p_.d2.sigma_hi() < p_.d1.sigma_hi();
        if (!take_neg && !take_pos) return std::nullopt;

        const int K = p_.partition_levels;
        const double delta = p_.contract_time / K;

        std::vector<std::vector<double>> transferred(static_cast<std::size_t>(K) + 1);
        {
            std::vector<double> u = phi_pde_;
            transferred[static_cast<std::size_t>(K)] = curvature_part(u, take_neg, take_pos);
            for (int k = K - 1; k >= 1; --k) {
                GridFunction sol = solve(convolved, GridFunction(pde_, std::move(u)), delta, p_.solve);
                u = std::move(sol.values());
                transferred[static_cast<std::size_t>(k)] = curvature_part(u, take_neg, take_pos);
            }
        }

        Contract f = zero_contract();
        restrict_to_control(transferred[static_cast<std::size_t>(K)],
                            f.stage_values[static_cast<std::size_t>(K - 1)]);
        for (int k = K - 1; k >= 1; --k) {
            GridFunction sol = solve(p_.d2, GridFunction(pde_, transferred[static_cast<std::size_t>(k + 1)]),
                                     delta, p_.solve);
            std::vector<double>& roll = sol.values();
            for (std::size_t i = 0; i < roll.size(); ++i)
                roll[i] = transferred[static_cast<std::size_t>(k)][i] - roll[i];
            restrict_to_control(roll, f.stage_values[static_cast<std::size_t>(k - 1)]);
        }
        f.gauge_fix();
        return f;
    }

    const InfConvProblem& p_;
    SpatialGrid pde_;
    SpatialGrid ctrl_;
    int ct_index_;
    int rank_ = 1;
    std::vector<double> stage_times_;
    std::vector<double> phi_pde_;  // m == 1 only
};

void check_contract(const InfConvProblem& p, const Contract& f) {
    if (f.stage_values.empty()) throw std::invalid_argument("contract has no stages");
    if (f.rank == 2) {
        if (p.X.m() != 2)
            throw std::invalid_argument("tensor contracts apply to two-increment payoffs only");
        return;
    }
    if (p.X.m() != 1 && f.stages() != 1)
        throw std::invalid_argument("multi-increment payoffs take single-stage contracts");
    const double last = f.stage_times.back();
    if (std::fabs(last - p.contract_time) > 1e-9 * std::max(1.0, std::fabs(p.contract_time)))
        throw std::invalid_argument("contract stages must end at the problem's contract time");
    const double delta = last / f.stages();
    for (int k = 0; k < f.stages(); ++k) {
        const double expected = delta * (k + 1);
        if (std::fabs(f.stage_times[static_cast<std::size_t>(k)] - expected) > 1e-9)
            throw std::invalid_argument("contract stages must be evenly spaced");
    }
}

}  // namespace

double functional_J(const InfConvProblem& p, const Contract& f) {
    validate(p);
    check_contract(p, f);
    return Engine(p).J(f);
}

double functional_J(const InfConvProblem& p, const GridFunction& psi) {
    Contract f;
    f.control = psi.grid();
    f.stage_times = {p.contract_time};
    f.stage_values = {psi.values()};
    f.rank = 1;
    return functional_J(p, f);
}

double contract_expectation(const Contract& f, const Driver& d, const SolveConfig& cfg) {
    validate(cfg);
    if (f.stage_values.empty()) throw std::invalid_argument("contract has no stages");
    double c_env = 1.0;
    for (const auto& stage : f.stage_values) {
        for (const double v : stage) c_env = std::max(c_env, std::fabs(v) + 1.0);
        for (std::size_t i = 0; i + 1 < stage.size(); ++i)
            c_env = std::max(c_env, std::fabs(stage[i + 1] - stage[i]) / f.control.dx());
    }
    const GrowthEnvelope env{c_env, 1};

    if (f.rank == 2) {
        const CylinderPayoff X(
            f.stage_times, [f](std::span<const double> inc) { return f.eval(inc); }, env);
        return evaluate(X, d, cfg);
    }

    const int K = f.stages();
    const double horizon = f.stage_times.back();
    const double delta = horizon / K;
    for (int k = 0; k < K; ++k)
        if (std::fabs(f.stage_times[static_cast<std::size_t>(k)] - delta * (k + 1)) > 1e-9)
            throw std::invalid_argument("contract stages must be evenly spaced");

    const Driver bands[] = {d};
    const SpatialGrid grid = build_grid(env, bands, horizon, cfg);
    std::vector<double> w(grid.n_points());
    for (std::size_t i = 0; i < grid.n_points(); ++i)
        w[i] = pl_eval(f.control, f.stage_values[static_cast<std::size_t>(K - 1)], grid.x(i));
    for (int k = K - 1; k >= 1; --k) {
        GridFunction sol = solve(d, GridFunction(grid, std::move(w)), delta, cfg);
        w = std::move(sol.values());
        for (std::size_t i = 0; i < grid.n_points(); ++i)
            w[i] +=
                pl_eval(f.control, f.stage_values[static_cast<std::size_t>(k - 1)], grid.x(i));
    }
    return solve(d, GridFunction(grid, std::move(w)), delta, cfg).value_at_center();
}

void trace_to_csv(const OptimizerTrace& trace, std::ostream& out) {
    const auto prev = out.precision(17);
    out << "iter,J,gap\n";
    for (std::size_t i = 0; i < trace.j_history.size(); ++i) {
        out << i << ',' << trace.j_history[i] << ',';
        if (trace.target) out << trace.j_history[i] - *trace.target;
        out << '\n';
    }
    out.precision(prev);
}

OptimizerTrace minimize(const InfConvProblem& p) {
    validate(p);
    const DriverConvolution conv = convolve_drivers(p.d1, p.d2);
    if (conv.is_degenerate())
        throw std::runtime_error(
            "degenerate: value is -inf (the driver bands do not intersect); use "
            "detect_divergence for the slope diagnostics");

    Engine eng(p);
    OptimizerTrace trace;

    // When the second band contains the first, zero transfer is already
    // optimal: the second expectation dominates the first on every payoff.
    if (p.d1.contained_in(p.d2)) {
        trace.best = eng.zero_contract();
        trace.best_j = eng.J(trace.best);
        trace.evaluations = 1;
        trace.j_history = {trace.best_j};
        return trace;
    }

    std::vector<Contract> starts = eng.starts(conv.driver());
    trace.best = starts[0];
    trace.best_j = eng.J(starts[0]);
    trace.evaluations = 1;
    trace.j_history.push_back(trace.best_j);
    for (std::size_t s = 1; s < starts.size(); ++s) {
        const double j = eng.J(starts[s]);
        ++trace.evaluations;
        if (j < trace.best_j) {
            trace.best = std::move(starts[s]);
            trace.best_j = j;
            trace.j_history.push_back(j);
        }
    }

    const OptimizerSettings& os = p.optimizer;
    if (os.max_iters <= 0) return trace;

    Contract cur = trace.best;
    double jcur = trace.best_j;
    const std::size_t n = cur.control.n_points();
    const std::size_t gauge =
        cur.rank == 2 ? cur.control.center() * n + cur.control.center() : cur.control.center();

    int iters = 0;
    bool done = false;
    while (!done) {
        const double sweep_start = jcur;
        for (auto& stage : cur.stage_values) {
            for (std::size_t i = 0; i < stage.size() && !done; ++i) {
                if (i == gauge) continue;
                const double saved = stage[i];
                stage[i] = saved + os.initial_step;
                const double jp = eng.J(cur);
                stage[i] = saved - os.initial_step;
                const double jm = eng.J(cur);
                trace.evaluations += 2;
                const double dir = jp < jm ? 1.0 : -1.0;
                bool accepted = false;
                if (std::min(jp, jm) < jcur) {
                    stage[i] = saved + dir * os.initial_step;
                    jcur = std::min(jp, jm);
                    accepted = true;
                } else {
                    double h = os.initial_step * os.step_decay;
                    while (h >= os.min_step) {
                        stage[i] = saved + dir * h;
                        const double jt = eng.J(cur);
                        ++trace.evaluations;
                        if (jt < jcur) {
                            jcur = jt;
                            accepted = true;
                            break;
                        }
                        h *= os.step_decay;
                    }
                    if (!accepted) stage[i] = saved;
                }
                if (accepted) {
                    trace.j_history.push_back(jcur);
                    if (++iters >= os.max_iters) done = true;
                }
            }
            if (done) break;
        }
        if (done) break;
        if (sweep_start - jcur < os.tolerance) break;
    }

    trace.iterations = iters;
    trace.best = std::move(cur);
    trace.best_j = jcur;
    return trace;
}

DivergenceReport detect_divergence(const Driver& d1, const Driver& d2, double t,
                                   std::span<const double> lambda_grid, const SolveConfig& cfg) {
    validate(cfg);
    if (!(t > 0.0)) throw std::invalid_argument("probe time must be positive");
    if (lambda_grid.empty()) throw std::invalid_argument("lambda grid is empty");
    if (convolve_drivers(d1, d2).is_proper())
        throw std::invalid_argument(
            "bands intersect, the functional is bounded below; the divergence probe applies to "
            "disjoint bands only");

    DivergenceReport rep;
    rep.t = t;
    Driver lower = d1;
    Driver upper = d2;
    if (d2.sigma_hi() < d1.sigma_lo()) {
        std::swap(lower, upper);
        rep.swapped = true;
    }
    rep.slope_predicted =
        (lower.sigma_hi() * lower.sigma_hi() - upper.sigma_lo() * upper.sigma_lo()) * t;

    rep.lambdas.assign(lambda_grid.begin(), lambda_grid.end());
    rep.j_values.reserve(rep.lambdas.size());
    for (const double lambda : rep.lambdas) {
        const GrowthEnvelope env{std::max(lambda, 1.0), 2};
        const CylinderPayoff up(
            {t}, [lambda](std::span<const double> inc) { return lambda * inc[0] * inc[0]; }, env);
        const CylinderPayoff down(
            {t}, [lambda](std::span<const double> inc) { return -lambda * inc[0] * inc[0]; }, env);
        rep.j_values.push_back(evaluate(up, lower, cfg) + evaluate(down, upper, cfg));
    }

    const std::size_t n = rep.lambdas.size();
    if (n == 1) {
        if (rep.lambdas[0] == 0.0)
            throw std::invalid_argument("a single lambda of 0 fits no slope");
        rep.slope_fit = rep.j_values[0] / rep.lambdas[0];
        return rep;
    }
    double mean_l = 0.0;
    double mean_j = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_l += rep.lambdas[i];
        mean_j += rep.j_values[i];
    }
    mean_l /= static_cast<double>(n);
    mean_j /= static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (rep.lambdas[i] - mean_l) * (rep.j_values[i] - mean_j);
        den += (rep.lambdas[i] - mean_l) * (rep.lambdas[i] - mean_l);
    }
    if (den == 0.0) throw std::invalid_argument("lambda grid has no spread");
    rep.slope_fit = num / den;
    return rep;
}

TheoremReport verify_theorem(const CylinderPayoff& X, const Driver& d1, const Driver& d2,
                             const TheoremSettings& cfg) {
    InfConvProblem p(d1, d2, X);
    if (cfg.control_points > 0) p.control_points = cfg.control_points;
    p.partition_levels = cfg.partition_levels;
    p.optimizer = cfg.optimizer;
    p.solve = cfg.solve;

    const DriverConvolution conv = convolve_drivers(d1, d2);
    if (conv.is_degenerate())
        throw std::runtime_error(
            "degenerate: value is -inf (the driver bands do not intersect); use "
            "detect_divergence for the slope diagnostics");

    TheoremReport rep;
    rep.tol_theorem = cfg.tol_theorem;
    rep.tol_lower = cfg.tol_lower;
    rep.target = evaluate(X, conv.driver(), cfg.solve);
    rep.trace = minimize(p);
    rep.achieved = rep.trace.best_j;
    rep.gap = rep.achieved - rep.target;
    rep.scale = std::max(1.0, std::fabs(rep.target));
    rep.pass = std::fabs(rep.gap) <= cfg.tol_theorem * rep.scale;
    rep.lower_bound_ok = true;
    for (const double j : rep.trace.j_history)
        if (j < rep.target - cfg.tol_lower * rep.scale) rep.lower_bound_ok = false;
    rep.trace.target = rep.target;
    rep.trace.gap = rep.gap;
    return rep;
}

NaryReport convolve_n_expectations(std::span<const Driver> drivers, const CylinderPayoff& X,
                                   const TheoremSettings& cfg) {
    if (drivers.size() < 2)
        throw std::invalid_argument("the n-band reduction needs at least two drivers");

    NaryReport rep;
    const auto run = [&X, &cfg, &rep](std::span<const Driver> order, bool record)
        -> std::optional<std::pair<Driver, double>> {
        Driver acc = order[0];
        double achieved = 0.0;
        for (std::size_t i = 1; i < order.size(); ++i) {
            const DriverConvolution conv = convolve_drivers(acc, order[i]);
            if (conv.is_degenerate()) {
                if (record) {
                    rep.degenerate = true;
                    rep.degenerate_stage = i;
                }
                return std::nullopt;
            }
            TheoremReport stage = verify_theorem(X, acc, order[i], cfg);
            achieved = stage.achieved;
            if (record) rep.stages.push_back({acc, order[i], std::move(stage)});
            acc = conv.driver();
        }
        return std::make_pair(acc, achieved);
    };

    const auto forward = run(drivers, true);
    if (!forward) return rep;
    rep.final_driver = forward->first;
    rep.final_achieved = forward->second;
    rep.final_target = rep.stages.back().theorem.target;

    std::vector<Driver> reversed(drivers.rbegin(), drivers.rend());
    const auto backward = run(reversed, false);
    if (backward) {
        rep.permutation_achieved = backward->second;
        rep.permutation_driver_exact = backward->first == forward->first;
        const double scale = std::max(1.0, std::fabs(rep.final_target));
        rep.permutation_achieved_close =
            std::fabs(backward->second - forward->second) <= 2.0 * cfg.tol_theorem * scale;
    }
    return rep;
}

}  // namespace gconv
