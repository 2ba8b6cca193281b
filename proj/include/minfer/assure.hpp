#pragma once

// Assurance of the high-assurance estimator A^_h of the identification region.
//
// A^_h = {theta : c(theta; psi^) >= max c(.; psi^) - h}. Its assurance, the
// probability that it sits inside Theta0, is estimated by a double bootstrap:
//
//   for b = 1..B_outer
//     draw d(b) at psi^, estimate psi^(b)
//     build the corroboration curve at psi^(b) (normal quadrature or a nested
//     bootstrap) and take A^_h(b) = [L(b), U(b)]
//     delta(b) = 1 if L^ <= L(b) <= U(b) <= U^   (closed rule, default)
//     delta(b) = 1 if L^ <= L(b) <  U(b) <= U^   (strict rule)
//   tau^ = mean delta(b), L_bar = mean L(b), U_bar = mean U(b)
//
// With a continuous inner curve A^_0(b) is one grid point, so the strict rule
// pins tau^(h = 0) to zero. Replicates with L(b) == U(b) are always counted in
// degenerate_count whichever rule is active.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "corroborate.hpp"
#include "grid.hpp"
#include "identify.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sampling.hpp"

namespace minfer {

enum class DeltaRule { closed, strict };

inline const char* delta_rule_name(DeltaRule r) noexcept
{
    return r == DeltaRule::closed ? "closed" : "strict";
}

inline bool assurance_delta(const ThetaInterval& ml, double lower, double upper, DeltaRule rule) noexcept
{
    const bool middle = rule == DeltaRule::strict ? lower < upper : lower <= upper;
    return ml.lower <= lower && middle && upper <= ml.upper;
}

struct AssuranceConfig {
    Count B_outer = 5000;
    // Unset: normal quadrature for missing data, nested bootstrap for matched.
    std::optional<CurveMethod> inner_method;
    Count inner_B = 1000;
    std::uint64_t master_seed = 0;
    std::vector<double> grid = make_grid(default_grid());
    DeltaRule delta_rule = DeltaRule::closed;
    unsigned threads = 0;
};

struct AssuranceReport {
    double h = 0.0;
    double tau_hat = 0.0;
    double L_bar = 0.0;
    double U_bar = 0.0;
    Count B_outer = 0;
    CurveMethod inner_method = CurveMethod::normal;
    Count inner_B = 0;
    std::uint64_t master_seed = 0;
    DeltaRule delta_rule = DeltaRule::closed;
    Count degenerate_count = 0; // replicates with L(b) == U(b)
    Count fallback_count = 0;   // normal inner curve replaced by bootstrap
};

inline CurveMethod resolve_inner_method(const ObservedTable& data, const AssuranceConfig& config)
{
    if (config.inner_method)
        return *config.inner_method;
    return setting_of(data) == Setting::missing ? CurveMethod::normal : CurveMethod::bootstrap;
}

namespace detail {

inline void check_assurance_config(const AssuranceConfig& config, CurveMethod inner, Setting setting)
{
    if (config.B_outer < 1)
        throw Error(Errc::invalid_argument, "B_outer must be >= 1");
    if (inner == CurveMethod::bootstrap && config.inner_B < 1)
        throw Error(Errc::invalid_argument, "inner_B must be >= 1");
    if (inner == CurveMethod::normal && setting != Setting::missing)
        throw Error(Errc::invalid_argument, "the normal approximation is only available for the missing setting");
    check_grid(config.grid);
}

struct ReplicateSets {
    std::vector<ThetaInterval> sets; // one per h
    bool fell_back = false;
};

template <SettingTable Table>
ReplicateSets replicate_sets(const Table& replicate, std::span<const double> hs, CurveMethod inner,
                             const AssuranceConfig& config, std::size_t b)
{
    const auto psi = mle_psi(replicate);
    const auto sizes = sizes_of(replicate);
    std::vector<double> values;
    double eps = 0.0;
    bool fell_back = false;
    bool use_normal = false;
    if constexpr (std::is_same_v<Table, MissingTable>)
        use_normal = inner == CurveMethod::normal && !normal_is_degenerate(psi);
    fell_back = inner == CurveMethod::normal && !use_normal;

    if (use_normal) {
        if constexpr (std::is_same_v<Table, MissingTable>) {
            values.reserve(config.grid.size());
            for (double theta : config.grid)
                values.push_back(corroboration_normal(psi, sizes.n, theta));
            eps = 1e-9;
        }
    } else {
        auto eng = ReplicateStream{config.master_seed, b, StreamDomain::inner_bootstrap}.engine();
        const auto regions = bootstrap_regions(psi, sizes, config.inner_B, eng);
        values = coverage_values(config.grid, regions);
        eps = 0.5 / static_cast<double>(config.inner_B);
    }

    ReplicateSets out;
    out.fell_back = fell_back;
    out.sets.reserve(hs.size());
    for (double h : hs)
        out.sets.push_back(max_corroboration_set(config.grid, values, h, eps).interval);
    return out;
}

template <SettingTable Table>
std::vector<AssuranceReport> assurance_bootstrap(const Table& data, std::span<const double> hs,
                                                 const AssuranceConfig& config, CurveMethod inner)
{
    const auto ml = ml_region(data);
    const auto psi_hat = mle_psi(data);
    const auto sizes = sizes_of(data);
    std::vector<ReplicateSets> reps(static_cast<std::size_t>(config.B_outer));
    parallel_for(reps.size(), config.threads, [&](std::size_t b) {
        const auto replicate = draw_observed(psi_hat, sizes, ReplicateStream{config.master_seed, b});
        reps[b] = replicate_sets(replicate, hs, inner, config, b);
    });

    // Serial reduction in replicate order keeps sums bit-identical.
    Count fallbacks = 0;
    for (const auto& r : reps)
        fallbacks += r.fell_back ? 1 : 0;
    const auto B = static_cast<double>(config.B_outer);
    std::vector<AssuranceReport> out;
    out.reserve(hs.size());
    for (std::size_t k = 0; k < hs.size(); ++k) {
        AssuranceReport rep;
        rep.h = hs[k];
        rep.B_outer = config.B_outer;
        rep.inner_method = inner;
        rep.inner_B = inner == CurveMethod::bootstrap || fallbacks > 0 ? config.inner_B : 0;
        rep.master_seed = config.master_seed;
        rep.delta_rule = config.delta_rule;
        rep.fallback_count = fallbacks;
        Count hits = 0;
        double sum_l = 0.0;
        double sum_u = 0.0;
        for (const auto& r : reps) {
            const auto& s = r.sets[k];
            hits += assurance_delta(ml, s.lower, s.upper, config.delta_rule) ? 1 : 0;
            rep.degenerate_count += s.lower == s.upper ? 1 : 0;
            sum_l += s.lower;
            sum_u += s.upper;
        }
        rep.tau_hat = static_cast<double>(hits) / B;
        rep.L_bar = sum_l / B;
        rep.U_bar = sum_u / B;
        out.push_back(rep);
    }
    return out;
}

} // namespace detail

/// Double-bootstrap assurance for several offsets h at once. Every h sees the
/// same outer replicates and inner curves, so the reports are directly comparable.
inline std::vector<AssuranceReport> assurance_bootstrap(const ObservedTable& data, std::span<const double> hs,
                                                        const AssuranceConfig& config)
{
    check_table(data);
    for (double h : hs)
        if (!(h >= 0.0 && h < 1.0))
            throw Error(Errc::invalid_argument, "offset h must lie in [0, 1)");
    const auto inner = resolve_inner_method(data, config);
    detail::check_assurance_config(config, inner, setting_of(data));
    return std::visit([&](const auto& t) { return detail::assurance_bootstrap(t, hs, config, inner); }, data);
}

inline AssuranceReport assurance_bootstrap(const ObservedTable& data, double h, const AssuranceConfig& config)
{
    const double hs[] = {h};
    return assurance_bootstrap(data, hs, config).front();
}

/// Assurance of the ML region itself: A^_h(b) replaced by the replicate's ML region.
inline AssuranceReport assurance_of_ml_region(const ObservedTable& data, Count B_outer, std::uint64_t master_seed,
                                              DeltaRule rule = DeltaRule::closed, unsigned threads = 0)
{
    check_table(data);
    if (B_outer < 1)
        throw Error(Errc::invalid_argument, "B_outer must be >= 1");
    const auto ml = ml_region(data);
    const auto regions = std::visit(
        [&](const auto& t) { return bootstrap_regions(mle_psi(t), sizes_of(t), B_outer, master_seed, threads); },
        data);
    AssuranceReport rep;
    rep.h = 0.0;
    rep.B_outer = B_outer;
    rep.inner_B = 0;
    rep.master_seed = master_seed;
    rep.delta_rule = rule;
    Count hits = 0;
    double sum_l = 0.0;
    double sum_u = 0.0;
    for (const auto& r : regions) {
        hits += assurance_delta(ml, r.lower, r.upper, rule) ? 1 : 0;
        rep.degenerate_count += r.lower == r.upper ? 1 : 0;
        sum_l += r.lower;
        sum_u += r.upper;
    }
    const auto B = static_cast<double>(B_outer);
    rep.tau_hat = static_cast<double>(hits) / B;
    rep.L_bar = sum_l / B;
    rep.U_bar = sum_u / B;
    return rep;
}

struct HSelection {
    double h = 0.0;
    AssuranceReport report;
    std::vector<AssuranceReport> all; // one per candidate, same order
};

/// Longest A^_h whose estimated assurance still reaches tau_min.
inline HSelection select_h(const ObservedTable& data, double tau_min, std::span<const double> candidates,
                           const AssuranceConfig& config)
{
    if (candidates.empty())
        throw Error(Errc::invalid_argument, "at least one candidate h is required");
    if (!std::is_sorted(candidates.begin(), candidates.end()))
        throw Error(Errc::invalid_argument, "candidate h values must be sorted ascending");
    auto reports = assurance_bootstrap(data, candidates, config);
    for (std::size_t k = reports.size(); k-- > 0;) {
        if (reports[k].tau_hat >= tau_min)
            return {candidates[k], reports[k], std::move(reports)};
    }
    throw Error(Errc::no_qualifying_h, "no candidate h reaches assurance " + std::to_string(tau_min));
}

} // namespace minfer
