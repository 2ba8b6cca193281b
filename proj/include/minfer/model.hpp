#pragma once

// Observed-data model for incomplete 2x2 tables.
//
// Two settings are supported:
//   missing - X observed only when R = 1; observation (n11, n01, n+0) given n,
//             multinomial(n; l11, l01, l+0).
//   matched - two independent samples, nx ~ binomial(n1, l1+) and
//             ny ~ binomial(n2, l+1); the joint table is never observed.
//
// The identifiable parameter psi is estimated by plain sample proportions.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <variant>

#include "error.hpp"

namespace minfer {

using Count = std::int64_t;

enum class Setting { missing, matched };

inline const char* setting_name(Setting s) noexcept
{
    return s == Setting::missing ? "missing" : "matched";
}

struct MissingTable {
    Count n11 = 0;
    Count n01 = 0;
    Count n_plus0 = 0;

    Count size() const noexcept { return n11 + n01 + n_plus0; }
    bool operator==(const MissingTable&) const = default;
};

struct MatchedTable {
    Count nx = 0;
    Count n1 = 0;
    Count ny = 0;
    Count n2 = 0;

    bool operator==(const MatchedTable&) const = default;
};

using ObservedTable = std::variant<MissingTable, MatchedTable>;

struct MissingPsi {
    double l11 = 0.0;
    double l01 = 0.0;
    double l_plus0 = 0.0;

    bool operator==(const MissingPsi&) const = default;
};

struct MatchedPsi {
    double l1p = 0.0;
    double lp1 = 0.0;

    bool operator==(const MatchedPsi&) const = default;
};

using Psi = std::variant<MissingPsi, MatchedPsi>;

struct MissingSizes {
    Count n = 0;
    bool operator==(const MissingSizes&) const = default;
};

struct MatchedSizes {
    Count n1 = 0;
    Count n2 = 0;
    bool operator==(const MatchedSizes&) const = default;
};

using SampleSizes = std::variant<MissingSizes, MatchedSizes>;

// Per-setting type bundle so generic algorithms can be written once.
template <class T>
struct setting_traits;

template <>
struct setting_traits<MissingTable> {
    using table = MissingTable;
    using psi = MissingPsi;
    using sizes = MissingSizes;
    static constexpr Setting setting = Setting::missing;
};

template <>
struct setting_traits<MatchedTable> {
    using table = MatchedTable;
    using psi = MatchedPsi;
    using sizes = MatchedSizes;
    static constexpr Setting setting = Setting::matched;
};

template <>
struct setting_traits<MissingPsi> : setting_traits<MissingTable> {};
template <>
struct setting_traits<MatchedPsi> : setting_traits<MatchedTable> {};
template <>
struct setting_traits<MissingSizes> : setting_traits<MissingTable> {};
template <>
struct setting_traits<MatchedSizes> : setting_traits<MatchedTable> {};

template <class T>
concept SettingPsi = std::is_same_v<T, MissingPsi> || std::is_same_v<T, MatchedPsi>;

template <class T>
concept SettingTable = std::is_same_v<T, MissingTable> || std::is_same_v<T, MatchedTable>;

inline constexpr double simplex_tolerance = 1e-12;

inline Setting setting_of(const ObservedTable& t) noexcept
{
    return std::holds_alternative<MissingTable>(t) ? Setting::missing : Setting::matched;
}

inline Setting setting_of(const Psi& p) noexcept
{
    return std::holds_alternative<MissingPsi>(p) ? Setting::missing : Setting::matched;
}

inline void check_table(const MissingTable& t)
{
    if (t.n11 < 0 || t.n01 < 0 || t.n_plus0 < 0)
        throw Error(Errc::negative_count, "missing-data counts must be non-negative");
    if (t.size() == 0)
        throw Error(Errc::empty_sample, "missing-data table has n = 0");
}

inline void check_table(const MatchedTable& t)
{
    if (t.nx < 0 || t.n1 < 0 || t.ny < 0 || t.n2 < 0)
        throw Error(Errc::negative_count, "matched-data counts must be non-negative");
    if (t.n1 == 0 || t.n2 == 0)
        throw Error(Errc::empty_sample, "matched-data samples need n1 >= 1 and n2 >= 1");
    if (t.nx > t.n1 || t.ny > t.n2)
        throw Error(Errc::inconsistent_totals, "matched-data counts need nx <= n1 and ny <= n2");
}

inline void check_table(const ObservedTable& t)
{
    std::visit([](const auto& v) { check_table(v); }, t);
}

/// Builds a validated table from raw counts: (n11, n01, n+0) for the missing
/// setting, (nx, n1, ny, n2) for the matched setting.
inline ObservedTable validate(std::span<const Count> raw, Setting setting)
{
    if (setting == Setting::missing) {
        if (raw.size() != 3)
            throw Error(Errc::invalid_argument,
                        "missing setting expects 3 counts (n11, n01, n+0), got " +
                            std::to_string(raw.size()));
        MissingTable t{raw[0], raw[1], raw[2]};
        check_table(t);
        return t;
    }
    if (raw.size() != 4)
        throw Error(Errc::invalid_argument,
                    "matched setting expects 4 counts (nx, n1, ny, n2), got " +
                        std::to_string(raw.size()));
    MatchedTable t{raw[0], raw[1], raw[2], raw[3]};
    check_table(t);
    return t;
}

inline void check_psi(const MissingPsi& p)
{
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(p.l11) || !in_unit(p.l01) || !in_unit(p.l_plus0))
        throw Error(Errc::invalid_argument, "psi components must lie in [0, 1]");
    if (std::abs(p.l11 + p.l01 + p.l_plus0 - 1.0) > simplex_tolerance)
        throw Error(Errc::invalid_argument, "missing-data psi must sum to 1");
}

inline void check_psi(const MatchedPsi& p)
{
    if (!(p.l1p >= 0.0 && p.l1p <= 1.0) || !(p.lp1 >= 0.0 && p.lp1 <= 1.0))
        throw Error(Errc::invalid_argument, "psi components must lie in [0, 1]");
}

inline void check_psi(const Psi& p)
{
    std::visit([](const auto& v) { check_psi(v); }, p);
}

inline void check_sizes(const MissingSizes& s)
{
    if (s.n < 1)
        throw Error(Errc::empty_sample, "sample size n must be >= 1");
}

inline void check_sizes(const MatchedSizes& s)
{
    if (s.n1 < 1 || s.n2 < 1)
        throw Error(Errc::empty_sample, "sample sizes n1, n2 must be >= 1");
}

inline MissingPsi mle_psi(const MissingTable& t)
{
    const auto n = static_cast<double>(t.size());
    return {static_cast<double>(t.n11) / n, static_cast<double>(t.n01) / n,
            static_cast<double>(t.n_plus0) / n};
}

inline MatchedPsi mle_psi(const MatchedTable& t)
{
    return {static_cast<double>(t.nx) / static_cast<double>(t.n1),
            static_cast<double>(t.ny) / static_cast<double>(t.n2)};
}

inline Psi mle_psi(const ObservedTable& t)
{
    return std::visit([](const auto& v) -> Psi { return mle_psi(v); }, t);
}

inline MissingSizes sizes_of(const MissingTable& t) noexcept { return {t.size()}; }
inline MatchedSizes sizes_of(const MatchedTable& t) noexcept { return {t.n1, t.n2}; }

inline SampleSizes sizes_of(const ObservedTable& t) noexcept
{
    return std::visit([](const auto& v) -> SampleSizes { return sizes_of(v); }, t);
}

} // namespace minfer
