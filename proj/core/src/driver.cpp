#include "gconv/driver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace gconv {

Driver::Driver(double sigma_lo, double sigma_hi) : lo_(sigma_lo), hi_(sigma_hi) {
    if (!std::isfinite(sigma_lo) || !std::isfinite(sigma_hi))
        throw std::invalid_argument("driver band must be finite");
    if (sigma_lo < 0.0 || sigma_hi < sigma_lo)
        throw std::invalid_argument("driver band requires 0 <= sigma_lo <= sigma_hi");
}

const Driver& DriverConvolution::driver() const {
    if (!driver_.has_value())
        throw std::logic_error("degenerate driver convolution has no driver");
    return *driver_;
}

double eval_G(const Driver& d, double alpha) {
    if (alpha >= 0.0) return 0.5 * d.sigma_hi() * d.sigma_hi() * alpha;
    return 0.5 * d.sigma_lo() * d.sigma_lo() * alpha;
}

DriverConvolution convolve_drivers(const Driver& d1, const Driver& d2) {
    const double lo = std::max(d1.sigma_lo(), d2.sigma_lo());
    const double hi = std::min(d1.sigma_hi(), d2.sigma_hi());
    if (lo <= hi) return DriverConvolution::proper(Driver(lo, hi));
    return DriverConvolution::degenerate();
}

DriverConvolution convolve_many(std::span<const Driver> drivers) {
    if (drivers.empty()) throw std::invalid_argument("convolve_many requires at least one driver");
    DriverConvolution acc = DriverConvolution::proper(drivers[0]);
    for (std::size_t i = 1; i < drivers.size(); ++i) {
        if (acc.is_degenerate()) return acc;
        acc = convolve_drivers(acc.driver(), drivers[i]);
    }
    return acc;
}

namespace {

double parse_decimal(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw std::invalid_argument("driver text: bad decimal '" + std::string(text) + "'");
    return value;
}

}  // namespace

Driver parse_driver(std::string_view text) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos)
        throw std::invalid_argument("driver text must be 'lo,hi': '" + std::string(text) + "'");
    const double lo = parse_decimal(text.substr(0, comma));
    const double hi = parse_decimal(text.substr(comma + 1));
    return Driver(lo, hi);
}

std::string format_driver(const Driver& d) {
    char buf[64];
    auto write = [&buf](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, ptr);
    };
    return write(d.sigma_lo()) + "," + write(d.sigma_hi());
}

}  // namespace gconv
