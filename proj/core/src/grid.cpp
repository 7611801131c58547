#include "gconv/grid.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace gconv {

SpatialGrid::SpatialGrid(double half_width, std::size_t n_points) : n_(n_points) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw std::invalid_argument("grid half_width must be positive and finite");
    if (n_points < 3 || n_points % 2 == 0)
        throw std::invalid_argument("grid n_points must be odd and >= 3");
    center_ = (n_points - 1) / 2;
    dx_ = half_width / static_cast<double>(center_);
}

GridFunction::GridFunction(SpatialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_points())
        throw std::invalid_argument("grid function values must have one entry per node");
}

GridFunction GridFunction::sample(const SpatialGrid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.n_points());
    for (std::size_t i = 0; i < grid.n_points(); ++i) v[i] = f(grid.x(i));
    return GridFunction(grid, std::move(v));
}

double GridFunction::operator()(double x) const {
    const std::size_t n = grid_.n_points();
    const double dx = grid_.dx();
    // Fractional index relative to the center node.
    const double s = x / dx + static_cast<double>(grid_.center());
    if (s <= 0.0) {
        const double slope = (values_[1] - values_[0]) / dx;
        return values_[0] + slope * (x - grid_.x(0));
    }
    if (s >= static_cast<double>(n - 1)) {
        const double slope = (values_[n - 1] - values_[n - 2]) / dx;
        return values_[n - 1] + slope * (x - grid_.x(n - 1));
    }
    const auto i = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(i);
    return values_[i] + w * (values_[i + 1] - values_[i]);
}

void GridFunction::to_csv(std::ostream& out) const {
    out << "x,u\n";
    const auto prev = out.precision(17);
    for (std::size_t i = 0; i < grid_.n_points(); ++i)
        out << grid_.x(i) << ',' << values_[i] << '\n';
    out.precision(prev);
}

}  // namespace gconv
