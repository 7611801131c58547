#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace gconv {

/// Volatility band [sigma_lo, sigma_hi] of a sublinear driver
///
///     G(a) = 0.5 * (sigma_hi^2 * max(a, 0) - sigma_lo^2 * max(-a, 0)).
///
/// The band is the whole state of the driver: every operation on expectations
/// with these drivers reduces to interval algebra on the bands.
///
/// Invariant: 0 <= sigma_lo <= sigma_hi, enforced at construction.
class Driver {
  public:
    Driver(double sigma_lo, double sigma_hi);

    double sigma_lo() const { return lo_; }
    double sigma_hi() const { return hi_; }

    /// True when [lo, hi] of *this is contained in other's band.
    bool contained_in(const Driver& other) const {
        return other.lo_ <= lo_ && hi_ <= other.hi_;
    }

    bool operator==(const Driver& other) const = default;

  private:
    double lo_;
    double hi_;
};

/// Result of inf-convolving driver bands: either a proper driver (the band
/// intersection is non-empty) or degenerate, in which case the convolved
/// expectation is -inf on every non-trivial payoff. Degeneracy is a branch
/// callers must take explicitly; it is never encoded as a float.
class DriverConvolution {
  public:
    static DriverConvolution proper(Driver d) { return DriverConvolution(std::move(d)); }
    static DriverConvolution degenerate() { return DriverConvolution(); }

    bool is_proper() const { return driver_.has_value(); }
    bool is_degenerate() const { return !driver_.has_value(); }

    /// Throws std::logic_error when degenerate.
    const Driver& driver() const;

    bool operator==(const DriverConvolution& other) const = default;

  private:
    DriverConvolution() = default;
    explicit DriverConvolution(Driver d) : driver_(std::move(d)) {}
    std::optional<Driver> driver_;
};

/// G(alpha) for the band. Positively homogeneous, subadditive, monotone in
/// the band ordering; G(0) = 0 exactly.
double eval_G(const Driver& d, double alpha);

/// Inf-convolution of two drivers: band intersection when non-empty,
/// degenerate otherwise. Comparisons are exact; no tolerance is applied.
DriverConvolution convolve_drivers(const Driver& d1, const Driver& d2);

/// Left-associated fold of convolve_drivers over the list. Empty list is
/// rejected. The result does not depend on the order of the list.
DriverConvolution convolve_many(std::span<const Driver> drivers);

/// Parses "lo,hi" (decimal literals, e.g. "1,2" or "0.5,3"). Throws
/// std::invalid_argument on malformed text or an invalid band.
Driver parse_driver(std::string_view text);

/// Formats as "lo,hi" with shortest round-trip precision.
std::string format_driver(const Driver& d);

}  // namespace gconv
