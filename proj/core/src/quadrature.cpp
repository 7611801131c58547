#include "gconv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gconv {

namespace {

/// Implicit-shift QL for a symmetric tridiagonal matrix, accumulating only
/// the first row of the eigenvector matrix (Golub-Welsch). On return d holds
/// eigenvalues and z the first eigenvector components, both unordered.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
    const std::size_t n = d.size();
    if (n == 1) return;
    e.push_back(0.0);
    for (std::size_t l = 0; l < n; ++l) {
        std::size_t iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 50) throw std::runtime_error("quadrature: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                for (std::size_t j = m; j-- > l;) {
                    double f = s * e[j];
                    const double b = c * e[j];
                    r = std::hypot(f, g);
                    e[j + 1] = r;
                    if (r == 0.0) {
                        d[j + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[j + 1] - p;
                    r = (d[j] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[j + 1] = g + p;
                    g = c * r - b;
                    f = z[j + 1];
                    z[j + 1] = s * z[j] + c * f;
                    z[j] = c * z[j] - s * f;
                }
                if (r == 0.0 && m - l > 1) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace

QuadratureRule::QuadratureRule(std::size_t order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
    const std::size_t n = order;

    // Jacobi matrix of physicists' Hermite polynomials: zero diagonal,
    // off-diagonal sqrt(k/2).
    std::vector<double> d(n, 0.0);
    std::vector<double> e(n - 1);
    for (std::size_t k = 1; k < n; ++k) e[k - 1] = std::sqrt(static_cast<double>(k) / 2.0);
    std::vector<double> z(n, 0.0);
    z[0] = 1.0;

    tridiagonal_ql(d, e, z);

    // Total weight sqrt(pi) cancels in the probability normalization:
    // p_i = z_i^2 with sum z^2 = 1 up to rounding.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&d](std::size_t a, std::size_t b) { return d[a] < d[b]; });

    nodes_.resize(n);
    weights_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes_[i] = std::sqrt(2.0) * d[idx[i]];  // map weight exp(-x^2) to N(0,1)
        weights_[i] = z[idx[i]] * z[idx[i]];
    }

    // Enforce exact symmetry; eigenvalues of the symmetric problem pair up
    // to rounding and the sign structure must be exact for odd moments.
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const double m = 0.5 * (nodes_[j] - nodes_[i]);
        nodes_[i] = -m;
        nodes_[j] = m;
        const double w = 0.5 * (weights_[i] + weights_[j]);
        weights_[i] = w;
        weights_[j] = w;
    }
    if (n % 2 == 1) nodes_[n / 2] = 0.0;

    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    for (double& w : weights_) w /= total;
}

double QuadratureRule::expectation(const std::function<double(double)>& f, double mean,
                                   double stddev) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(mean + stddev * nodes_[i]);
    return acc;
}

double gaussian_oracle(const std::function<double(double)>& phi, double sigma, double t, double x,
                       std::size_t q) {
    const QuadratureRule rule(q);
    return rule.expectation(phi, x, sigma * std::sqrt(t));
}

}  // namespace gconv
