#pragma once

// Likelihoods of theta = P(X = 1) in the missing-data setting.
//
// The observed-data log-likelihood is
//     n11 log l11 + n01 log l01 + n+0 log l+0
// (multinomial coefficient dropped). The profile over {psi : theta in Theta(psi)}
// has a closed form:
//   theta < l^11                 l11 = theta, 1 - theta split over (l01, l+0) ~ (n01, n+0)
//   l^11 <= theta <= l^11 + l^+0 unconstrained maximum (flat region)
//   theta > l^11 + l^+0          l01 = 1 - theta, theta split over (l11, l+0) ~ (n11, n+0)

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "identify.hpp"
#include "model.hpp"

namespace minfer {

namespace detail {

// count * log(p) with the 0 * log(0) = 0 convention.
inline double xlogy(Count count, double p) noexcept
{
    if (count == 0)
        return 0.0;
    if (p <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return static_cast<double>(count) * std::log(p);
}

inline void check_theta(double theta)
{
    if (!(theta >= 0.0 && theta <= 1.0))
        throw Error(Errc::theta_out_of_domain, "theta must lie in [0, 1], got " + std::to_string(theta));
}

// Splits `mass` over two cells proportionally to their counts. Any split is a
// maximizer when both counts are zero; an even one is used.
inline std::pair<double, double> split_mass(double mass, Count a, Count b) noexcept
{
    const Count total = a + b;
    if (total == 0)
        return {mass / 2.0, mass / 2.0};
    return {mass * static_cast<double>(a) / static_cast<double>(total),
            mass * static_cast<double>(b) / static_cast<double>(total)};
}

} // namespace detail

inline double log_lik(const MissingTable& data, const MissingPsi& psi) noexcept
{
    return detail::xlogy(data.n11, psi.l11) + detail::xlogy(data.n01, psi.l01) +
           detail::xlogy(data.n_plus0, psi.l_plus0);
}

/// Maximizer of the observed-data likelihood subject to theta in Theta(psi).
inline MissingPsi profile_maximizer(const MissingTable& data, double theta)
{
    detail::check_theta(theta);
    const Count n = data.size();
    // Compare on the integer lattice: theta < n11/n  <=>  theta * n < n11.
    const double scaled = theta * static_cast<double>(n);
    if (scaled < static_cast<double>(data.n11)) {
        const auto [l01, l0] = detail::split_mass(1.0 - theta, data.n01, data.n_plus0);
        return {theta, l01, l0};
    }
    if (scaled > static_cast<double>(data.n11 + data.n_plus0)) {
        const auto [l11, l0] = detail::split_mass(theta, data.n11, data.n_plus0);
        return {l11, 1.0 - theta, l0};
    }
    return mle_psi(data);
}

/// Profile log-likelihood of theta. Returns -inf when theta forces a cell
/// probability to zero against a positive count.
inline double profile_log_lik(const MissingTable& data, double theta)
{
    return log_lik(data, profile_maximizer(data, theta));
}

/// Log-likelihood under MCAR (X independent of R): binomial in theta on the
/// respondents, independent of n+0.
inline double mcar_log_lik(const MissingTable& data, double theta)
{
    detail::check_theta(theta);
    return detail::xlogy(data.n11, theta) + detail::xlogy(data.n01, 1.0 - theta);
}

inline double mcar_argmax(const MissingTable& data)
{
    const Count respondents = data.n11 + data.n01;
    if (respondents == 0)
        throw Error(Errc::empty_sample, "MCAR likelihood is flat when n+1 = 0");
    return static_cast<double>(data.n11) / static_cast<double>(respondents);
}

/// Profile likelihood ratio LR_p(theta_star, theta_ref).
inline double profile_lr(const MissingTable& data, double theta_star, double theta_ref)
{
    const double num = profile_log_lik(data, theta_star);
    const double den = profile_log_lik(data, theta_ref);
    if (num == den)
        return 1.0;
    return std::exp(num - den);
}

struct LikelihoodPoint {
    double theta = 0.0;
    double log_lik = 0.0;
    double standardized = 0.0;
};

/// Rescales log-likelihoods so the largest value on the grid maps to 1.
inline std::vector<double> standardize(std::span<const double> log_liks)
{
    std::vector<double> out(log_liks.size(), 0.0);
    if (log_liks.empty())
        return out;
    const double peak = *std::max_element(log_liks.begin(), log_liks.end());
    if (!std::isfinite(peak))
        return out;
    std::transform(log_liks.begin(), log_liks.end(), out.begin(),
                   [peak](double v) { return std::isfinite(v) ? std::exp(v - peak) : 0.0; });
    return out;
}

template <class LogLik>
std::vector<LikelihoodPoint> likelihood_curve(std::span<const double> grid, LogLik&& f)
{
    std::vector<double> values;
    values.reserve(grid.size());
    for (double theta : grid)
        values.push_back(f(theta));
    const auto std_values = standardize(values);
    std::vector<LikelihoodPoint> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.push_back({grid[i], values[i], std_values[i]});
    return out;
}

inline std::vector<LikelihoodPoint> profile_curve(const MissingTable& data, std::span<const double> grid)
{
    return likelihood_curve(grid, [&](double t) { return profile_log_lik(data, t); });
}

inline std::vector<LikelihoodPoint> mcar_curve(const MissingTable& data, std::span<const double> grid)
{
    return likelihood_curve(grid, [&](double t) { return mcar_log_lik(data, t); });
}

} // namespace minfer
