#pragma once

// Corroboration of theta: c(theta; psi) = P(theta in ML region; psi), the
// probability that the maximum likelihood region of a fresh sample drawn at psi
// covers theta. Evaluated at psi^ it is the observed corroboration, at the true
// psi0 the actual corroboration.
//
// Two estimators:
//   bootstrap - B tables drawn at psi; one replicate set serves the whole grid
//               (common random numbers), so every value is a multiple of 1/B.
//   normal    - missing setting only; (l^11, l^+0) treated as bivariate normal
//               and P(A <= theta <= A + B) integrated over A by adaptive
//               Gauss-Kronrod quadrature.
//
// Level sets are reported as the convex hull of qualifying grid points.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"
#include "identify.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sampling.hpp"

namespace minfer {

enum class CurveMethod { bootstrap, normal };

inline const char* method_name(CurveMethod m) noexcept
{
    return m == CurveMethod::bootstrap ? "bootstrap" : "normal";
}

struct CorroborationCurve {
    std::vector<double> grid;
    std::vector<double> values;
    CurveMethod method = CurveMethod::bootstrap;
    Count B = 0; // bootstrap only
    Psi psi_at;
    SampleSizes sizes;
    std::uint64_t master_seed = 0;

    /// Slack used when thresholding: bootstrap values sit on a 1/B lattice.
    double tie_epsilon() const noexcept
    {
        return method == CurveMethod::bootstrap && B > 0 ? 0.5 / static_cast<double>(B) : 1e-9;
    }
};

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

namespace detail {

inline void check_grid(std::span<const double> grid)
{
    if (grid.empty())
        throw Error(Errc::invalid_argument, "theta grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] <= 1.0))
            throw Error(Errc::theta_out_of_domain, "grid points must lie in [0, 1]");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw Error(Errc::invalid_argument, "grid must be strictly increasing");
    }
}

} // namespace detail

/// Number of regions covering each grid point (closed membership).
inline std::vector<Count> coverage_counts(std::span<const double> grid, std::span<const ThetaInterval> regions)
{
    std::vector<Count> diff(grid.size() + 1, 0);
    for (const auto& r : regions) {
        const auto lo = std::lower_bound(grid.begin(), grid.end(), r.lower) - grid.begin();
        const auto hi = std::upper_bound(grid.begin(), grid.end(), r.upper) - grid.begin();
        if (lo < hi) {
            ++diff[static_cast<std::size_t>(lo)];
            --diff[static_cast<std::size_t>(hi)];
        }
    }
    std::vector<Count> counts(grid.size());
    Count running = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        running += diff[i];
        counts[i] = running;
    }
    return counts;
}

inline std::vector<double> coverage_values(std::span<const double> grid, std::span<const ThetaInterval> regions)
{
    const auto counts = coverage_counts(grid, regions);
    std::vector<double> values(counts.size());
    const auto b = static_cast<double>(regions.size());
    std::transform(counts.begin(), counts.end(), values.begin(),
                   [b](Count c) { return static_cast<double>(c) / b; });
    return values;
}

/// ML regions of B tables drawn at psi, replicate b using stream (seed, b).
template <SettingPsi P>
std::vector<ThetaInterval> bootstrap_regions(const P& psi, const typename setting_traits<P>::sizes& sizes,
                                             Count B, std::uint64_t master_seed, unsigned threads = 0)
{
    if (B < 1)
        throw Error(Errc::invalid_argument, "bootstrap replicate count B must be >= 1");
    check_psi(psi);
    check_sizes(sizes);
    std::vector<ThetaInterval> regions(static_cast<std::size_t>(B));
    parallel_for(regions.size(), threads, [&](std::size_t b) {
        regions[b] = ml_region(draw_observed(psi, sizes, ReplicateStream{master_seed, b}));
    });
    return regions;
}

/// Same draw sequence on a caller-owned engine; used for nested bootstraps.
template <SettingPsi P>
std::vector<ThetaInterval> bootstrap_regions(const P& psi, const typename setting_traits<P>::sizes& sizes,
                                             Count B, Engine& eng)
{
    std::vector<ThetaInterval> regions;
    regions.reserve(static_cast<std::size_t>(B));
    for (Count b = 0; b < B; ++b)
        regions.push_back(ml_region(draw_observed(psi, sizes, eng)));
    return regions;
}

template <SettingPsi P>
CorroborationCurve corroboration_bootstrap(const P& psi, const typename setting_traits<P>::sizes& sizes,
                                           std::vector<double> grid, Count B, std::uint64_t master_seed,
                                           unsigned threads = 0)
{
    detail::check_grid(grid);
    const auto regions = bootstrap_regions(psi, sizes, B, master_seed, threads);
    CorroborationCurve curve;
    curve.values = coverage_values(grid, regions);
    curve.grid = std::move(grid);
    curve.method = CurveMethod::bootstrap;
    curve.B = B;
    curve.psi_at = psi;
    curve.sizes = sizes;
    curve.master_seed = master_seed;
    return curve;
}

inline CorroborationCurve corroboration_bootstrap(const Psi& psi, const SampleSizes& sizes, std::vector<double> grid,
                                                  Count B, std::uint64_t master_seed, unsigned threads = 0)
{
    return std::visit(
        [&](const auto& p) {
            using S = typename setting_traits<std::decay_t<decltype(p)>>::sizes;
            const auto* s = std::get_if<S>(&sizes);
            if (!s)
                throw Error(Errc::invalid_argument, "sample sizes do not match the psi setting");
            return corroboration_bootstrap(p, *s, std::move(grid), B, master_seed, threads);
        },
        psi);
}

// ---------------------------------------------------------------------------
// Normal approximation (missing setting)
// ---------------------------------------------------------------------------

inline bool normal_is_degenerate(const MissingPsi& psi) noexcept
{
    auto edge = [](double v) { return v <= 0.0 || v >= 1.0; };
    return edge(psi.l11) || edge(psi.l_plus0);
}

/// P(A <= theta <= A + B) with (A, B) ~ N2 at mean (l11, l+0), variances
/// l(1 - l)/n and covariance -l11 l+0 / n.
inline double corroboration_normal(const MissingPsi& psi, Count n, double theta)
{
    if (n < 1)
        throw Error(Errc::empty_sample, "sample size n must be >= 1");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw Error(Errc::theta_out_of_domain, "theta must lie in [0, 1]");
    if (normal_is_degenerate(psi))
        throw Error(Errc::degenerate_variance, "normal approximation needs l11 and l+0 strictly inside (0, 1)");

    constexpr double z_min = -10.0;
    constexpr double z_max = 10.0;
    const double nn = static_cast<double>(n);
    const double l11 = psi.l11;
    const double l0 = psi.l_plus0;
    const double sd_a = std::sqrt(l11 * (1.0 - l11) / nn);
    const double z_theta = (theta - l11) / sd_a;
    if (z_theta <= z_min)
        return 0.0;

    auto upper_tail = [](double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); };
    auto density = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };

    // B | A = a is normal with mean l+0 - slope (a - l11) and variance
    // l+0 l01 / (n (1 - l11)); it collapses to B = 1 - A when l01 = 0.
    const double l01 = std::max(0.0, psi.l01);
    const double slope = l0 / (1.0 - l11);
    const double sd_b = std::sqrt(l0 * l01 / (nn * (1.0 - l11)));
    const double hi = std::min(z_theta, z_max);
    if (sd_b == 0.0)
        return 0.5 * std::erfc(-hi / std::sqrt(2.0));

    // Need B >= theta - a, i.e. g(a) = (l+0 - slope (a - l11) - theta + a) / sd_b >= 0.
    auto integrand = [&](double z) {
        const double a = l11 + sd_a * z;
        const double margin = (l0 - slope * (a - l11) - (theta - a)) / sd_b;
        return density(z) * upper_tail(-margin);
    };

    using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;
    constexpr unsigned max_depth = 20;
    constexpr double rel_tol = 1e-10;
    // Split at the point where the conditional probability crosses 1/2; the
    // integrand is sharpest there.
    const double a_half = (theta - l0 - slope * l11) / (1.0 - slope);
    const double z_half = (a_half - l11) / sd_a;
    double total = 0.0;
    if (z_half > z_min && z_half < hi) {
        total += Quadrature::integrate(integrand, z_min, z_half, max_depth, rel_tol);
        total += Quadrature::integrate(integrand, z_half, hi, max_depth, rel_tol);
    } else {
        total = Quadrature::integrate(integrand, z_min, hi, max_depth, rel_tol);
    }
    return std::clamp(total, 0.0, 1.0);
}

inline CorroborationCurve corroboration_normal_curve(const MissingPsi& psi, Count n, std::vector<double> grid)
{
    detail::check_grid(grid);
    CorroborationCurve curve;
    curve.values.reserve(grid.size());
    for (double theta : grid)
        curve.values.push_back(corroboration_normal(psi, n, theta));
    curve.grid = std::move(grid);
    curve.method = CurveMethod::normal;
    curve.psi_at = psi;
    curve.sizes = MissingSizes{n};
    return curve;
}

struct CurveOptions {
    CurveMethod method = CurveMethod::bootstrap;
    Count B = 5000;
    std::uint64_t master_seed = 0;
    unsigned threads = 0;
};

/// Corroboration curve at psi with the requested method. The normal method is
/// only defined for the missing setting; a degenerate psi falls back to the
/// bootstrap, which the returned curve's method field records.
inline CorroborationCurve corroboration_curve(const Psi& psi, const SampleSizes& sizes, std::vector<double> grid,
                                              const CurveOptions& opt)
{
    if (opt.method == CurveMethod::normal) {
        const auto* p = std::get_if<MissingPsi>(&psi);
        const auto* s = std::get_if<MissingSizes>(&sizes);
        if (!p || !s)
            throw Error(Errc::invalid_argument, "the normal approximation is only available for the missing setting");
        if (!normal_is_degenerate(*p))
            return corroboration_normal_curve(*p, s->n, std::move(grid));
    }
    return corroboration_bootstrap(psi, sizes, std::move(grid), opt.B, opt.master_seed, opt.threads);
}

/// Observed corroboration: the curve evaluated at psi^ of the data.
inline CorroborationCurve observed_corroboration(const ObservedTable& data, std::vector<double> grid,
                                                 const CurveOptions& opt)
{
    return corroboration_curve(mle_psi(data), sizes_of(data), std::move(grid), opt);
}

// ---------------------------------------------------------------------------
// Large-sample limit
// ---------------------------------------------------------------------------

/// Limit of the actual corroboration as n grows. std::nullopt where the limit
/// is not tabulated (missing: theta = L0 = 0 or theta = U0 = 1; either setting:
/// a point-identified psi with L0 = U0).
inline std::optional<double> asymptotic_corroboration(const MissingPsi& psi, double theta)
{
    const auto region = theta_interval(psi);
    if (theta < region.lower || theta > region.upper)
        return 0.0;
    if (strictly_inside(theta, region))
        return 1.0;
    if (region.lower == region.upper)
        return std::nullopt;
    if (theta == region.lower)
        return region.lower > 0.0 ? std::optional<double>(0.5) : std::nullopt;
    return region.upper < 1.0 ? std::optional<double>(0.5) : std::nullopt;
}

inline std::optional<double> asymptotic_corroboration(const MatchedPsi& psi, double theta)
{
    const auto region = theta_interval(psi);
    if (theta < region.lower || theta > region.upper)
        return 0.0;
    if (strictly_inside(theta, region))
        return 1.0;
    if (region.lower == region.upper)
        return std::nullopt;
    if (theta == region.lower)
        return psi.l1p + psi.lp1 >= 1.0 ? 0.5 : 1.0;
    return psi.l1p != psi.lp1 ? 0.5 : 0.25;
}

inline std::optional<double> asymptotic_corroboration(const Psi& psi, double theta)
{
    return std::visit([theta](const auto& p) { return asymptotic_corroboration(p, theta); }, psi);
}

// ---------------------------------------------------------------------------
// Level sets
// ---------------------------------------------------------------------------

enum class LevelKind { alpha_level, h_offset, max_set };

struct LevelSet {
    ThetaInterval interval;
    double level = 0.0; // alpha, or h for h_offset / max_set
    LevelKind kind = LevelKind::alpha_level;
    double c_max = 0.0;
    double theta_max = 0.0; // first grid point attaining c_max
};

namespace detail {

// Hull of grid points with value >= threshold; nullopt if there are none.
inline std::optional<ThetaInterval> hull_above(std::span<const double> grid, std::span<const double> values,
                                               double threshold) noexcept
{
    std::optional<std::size_t> first;
    std::size_t last = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= threshold) {
            if (!first)
                first = i;
            last = i;
        }
    }
    if (!first)
        return std::nullopt;
    return ThetaInterval{grid[*first], grid[last]};
}

} // namespace detail

/// Smallest interval holding every grid point within h of the curve maximum.
/// Works on raw grid/value spans so the assurance bootstrap can reuse buffers.
inline LevelSet max_corroboration_set(std::span<const double> grid, std::span<const double> values, double h,
                                      double tie_epsilon)
{
    if (grid.empty() || grid.size() != values.size())
        throw Error(Errc::invalid_argument, "corroboration curve is empty or malformed");
    if (!(h >= 0.0))
        throw Error(Errc::invalid_argument, "offset h must be >= 0");
    const auto peak = std::max_element(values.begin(), values.end());
    const double c_max = *peak;
    LevelSet out;
    out.interval = *detail::hull_above(grid, values, c_max - h - tie_epsilon);
    out.level = h;
    out.kind = h == 0.0 ? LevelKind::max_set : LevelKind::h_offset;
    out.c_max = c_max;
    out.theta_max = grid[static_cast<std::size_t>(peak - values.begin())];
    return out;
}

inline LevelSet max_corroboration_set(const CorroborationCurve& curve, double h)
{
    return max_corroboration_set(curve.grid, curve.values, h, curve.tie_epsilon());
}

/// A_alpha: hull of grid points whose corroboration reaches alpha.
inline LevelSet level_set(const CorroborationCurve& curve, double alpha)
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw Error(Errc::invalid_argument, "alpha must lie in (0, 1]");
    if (curve.grid.empty() || curve.grid.size() != curve.values.size())
        throw Error(Errc::invalid_argument, "corroboration curve is empty or malformed");
    const auto hull = detail::hull_above(curve.grid, curve.values, alpha - curve.tie_epsilon());
    if (!hull)
        throw Error(Errc::empty_level_set, "no grid point reaches corroboration " + std::to_string(alpha));
    const auto peak = std::max_element(curve.values.begin(), curve.values.end());
    LevelSet out;
    out.interval = *hull;
    out.level = alpha;
    out.kind = LevelKind::alpha_level;
    out.c_max = *peak;
    out.theta_max = curve.grid[static_cast<std::size_t>(peak - curve.values.begin())];
    return out;
}

} // namespace minfer
