#pragma once

// Identification bounds for theta.
//
//   missing: theta = P(X = 1),        Theta(psi) = [l11, l11 + l+0]
//   matched: theta = P(X = 1, Y = 1), Theta(psi) = [max(l1+ + l+1 - 1, 0), min(l1+, l+1)]
//
// Intervals are closed. strictly_inside() is the separate interior predicate.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "model.hpp"

namespace minfer {

struct ThetaInterval {
    double lower = 0.0;
    double upper = 0.0;

    double width() const noexcept { return upper - lower; }
    bool contains(double theta) const noexcept { return lower <= theta && theta <= upper; }
    bool contains(const ThetaInterval& other) const noexcept
    {
        return lower <= other.lower && other.upper <= upper;
    }
    bool operator==(const ThetaInterval&) const = default;
};

inline bool strictly_inside(double theta, const ThetaInterval& interval) noexcept
{
    return interval.lower < theta && theta < interval.upper;
}

inline double hausdorff_distance(const ThetaInterval& a, const ThetaInterval& b) noexcept
{
    return std::max(std::abs(a.lower - b.lower), std::abs(a.upper - b.upper));
}

inline ThetaInterval theta_interval(const MissingPsi& psi) noexcept
{
    // l11 + l+0 can exceed 1 by rounding when l01 == 0.
    return {psi.l11, std::min(1.0, psi.l11 + psi.l_plus0)};
}

inline ThetaInterval theta_interval(const MatchedPsi& psi) noexcept
{
    return {std::max(psi.l1p + psi.lp1 - 1.0, 0.0), std::min(psi.l1p, psi.lp1)};
}

inline ThetaInterval theta_interval(const Psi& psi) noexcept
{
    return std::visit([](const auto& p) { return theta_interval(p); }, psi);
}

// Exact rational endpoints of the ML region, reduced to lowest terms.
struct Rational {
    Count num = 0;
    Count den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

inline Rational make_rational(Count num, Count den) noexcept
{
    const Count g = std::gcd(num, den);
    return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

struct ExactInterval {
    Rational lower;
    Rational upper;
};

inline ExactInterval ml_region_exact(const MissingTable& t) noexcept
{
    return {make_rational(t.n11, t.size()), make_rational(t.n11 + t.n_plus0, t.size())};
}

inline ExactInterval ml_region_exact(const MatchedTable& t) noexcept
{
    // Common denominator n1 * n2.
    const Count den = t.n1 * t.n2;
    const Count a = t.nx * t.n2;
    const Count b = t.ny * t.n1;
    return {make_rational(std::max<Count>(a + b - den, 0), den), make_rational(std::min(a, b), den)};
}

inline ExactInterval ml_region_exact(const ObservedTable& data) noexcept
{
    return std::visit([](const auto& t) { return ml_region_exact(t); }, data);
}

/// Maximum likelihood region: Theta evaluated at the plug-in MLE of psi.
/// Endpoints are formed from integer counts with a single division, so a
/// lattice value such as 55/110 compares equal to the literal 0.5.
template <SettingTable Table>
ThetaInterval ml_region(const Table& data) noexcept
{
    const auto exact = ml_region_exact(data);
    return {exact.lower.value(), exact.upper.value()};
}

inline ThetaInterval ml_region(const ObservedTable& data) noexcept
{
    return std::visit([](const auto& t) { return ml_region(t); }, data);
}

} // namespace minfer
