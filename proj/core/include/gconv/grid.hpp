#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

namespace gconv {

/// Uniform symmetric grid on [-half_width, half_width] with an odd number of
/// nodes, so that x = 0 is the exact center node. Nodes are computed as
/// (i - center) * dx, which makes the grid exactly symmetric in floating
/// point and puts 0.0 on the grid bitwise.
///
/// Invariants: n_points odd and >= 3, half_width > 0.
class SpatialGrid {
  public:
    SpatialGrid(double half_width, std::size_t n_points);

    double x(std::size_t i) const { return (static_cast<double>(i) - static_cast<double>(center_)) * dx_; }
    double dx() const { return dx_; }
    std::size_t n_points() const { return n_; }
    std::size_t center() const { return center_; }
    double x_min() const { return x(0); }
    double x_max() const { return x(n_ - 1); }

    bool operator==(const SpatialGrid& other) const = default;

  private:
    std::size_t n_;
    std::size_t center_;
    double dx_;
};

/// Nodal values on a SpatialGrid. Evaluation is piecewise linear between
/// nodes and extends linearly outside the grid with the one-sided boundary
/// slope. Linear interpolation is deliberate: it preserves the comparison
/// principle (monotone data stay monotone), which higher-order interpolation
/// can break.
class GridFunction {
  public:
    GridFunction(SpatialGrid grid, std::vector<double> values);

    /// Samples f at every node.
    static GridFunction sample(const SpatialGrid& grid, const std::function<double(double)>& f);

    const SpatialGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double value_at_center() const { return values_[grid_.center()]; }

    /// Piecewise-linear value; linear extension beyond the boundary.
    double operator()(double x) const;

    /// Writes "x,u" header plus one full-precision row per node.
    void to_csv(std::ostream& out) const;

  private:
    SpatialGrid grid_;
    std::vector<double> values_;
};

}  // namespace gconv
