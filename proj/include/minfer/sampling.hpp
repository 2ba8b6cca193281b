#pragma once

// Seeded generation of observed and complete tables.
//
// Every replicate owns an engine derived from (master_seed, replicate_index,
// domain) through std::seed_seq, so results never depend on the order in which
// replicates run. std::mt19937_64, std::seed_seq and Boost's binomial sampler are
// all fully specified algorithms, which keeps streams identical across platforms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include <boost/random/binomial_distribution.hpp>

#include "model.hpp"

namespace minfer {

using Engine = std::mt19937_64;

// Separates independent uses of the same (seed, index) pair.
enum class StreamDomain : std::uint32_t {
    replicate = 0,
    inner_bootstrap = 1,
    simulation = 2,
};

struct ReplicateStream {
    std::uint64_t master_seed = 0;
    std::uint64_t replicate_index = 0;
    StreamDomain domain = StreamDomain::replicate;

    Engine engine() const
    {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                          static_cast<std::uint32_t>(master_seed >> 32),
                          static_cast<std::uint32_t>(replicate_index & 0xffffffffu),
                          static_cast<std::uint32_t>(replicate_index >> 32),
                          static_cast<std::uint32_t>(domain)};
        return Engine(seq);
    }
};

/// Derives a child master seed, e.g. for the inner bootstrap of outer replicate b.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index, StreamDomain domain)
{
    auto eng = ReplicateStream{master_seed, index, domain}.engine();
    return eng();
}

inline Count draw_binomial(Engine& eng, Count trials, double p)
{
    if (trials <= 0 || p <= 0.0)
        return 0;
    if (p >= 1.0)
        return trials;
    boost::random::binomial_distribution<Count, double> dist(trials, p);
    return dist(eng);
}

// Multinomial by sequential conditional binomials.
template <std::size_t K>
std::array<Count, K> draw_multinomial(Engine& eng, Count n, const std::array<double, K>& probs)
{
    std::array<Count, K> out{};
    Count remaining = n;
    double mass = 1.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        if (remaining == 0)
            break;
        const double p = mass > 0.0 ? std::clamp(probs[k] / mass, 0.0, 1.0) : 0.0;
        out[k] = draw_binomial(eng, remaining, p);
        remaining -= out[k];
        mass -= probs[k];
    }
    out[K - 1] = remaining;
    return out;
}

inline MissingTable draw_observed(const MissingPsi& psi, const MissingSizes& sizes, Engine& eng)
{
    const auto c = draw_multinomial<3>(eng, sizes.n, {psi.l11, psi.l01, psi.l_plus0});
    return {c[0], c[1], c[2]};
}

inline MatchedTable draw_observed(const MatchedPsi& psi, const MatchedSizes& sizes, Engine& eng)
{
    const Count nx = draw_binomial(eng, sizes.n1, psi.l1p);
    const Count ny = draw_binomial(eng, sizes.n2, psi.lp1);
    return {nx, sizes.n1, ny, sizes.n2};
}

template <SettingPsi P>
auto draw_observed(const P& psi, const typename setting_traits<P>::sizes& sizes, const ReplicateStream& stream)
{
    auto eng = stream.engine();
    return draw_observed(psi, sizes, eng);
}

inline ObservedTable draw_observed(const Psi& psi, const SampleSizes& sizes, const ReplicateStream& stream)
{
    return std::visit(
        [&](const auto& p) -> ObservedTable {
            using P = std::decay_t<decltype(p)>;
            using S = typename setting_traits<P>::sizes;
            const auto* s = std::get_if<S>(&sizes);
            if (!s)
                throw Error(Errc::invalid_argument, "sample sizes do not match the psi setting");
            return draw_observed(p, *s, stream);
        },
        psi);
}

/// Complete-data parameter lambda = (l11, l10, l01, l00).
struct SimTruth {
    double l11 = 0.0;
    double l10 = 0.0;
    double l01 = 0.0;
    double l00 = 0.0;

    void check() const
    {
        for (double v : {l11, l10, l01, l00})
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(Errc::invalid_argument, "lambda components must lie in [0, 1]");
        if (std::abs(l11 + l10 + l01 + l00 - 1.0) > simplex_tolerance)
            throw Error(Errc::invalid_argument, "lambda must sum to 1");
    }

    MissingPsi missing_psi() const noexcept { return {l11, l01, l10 + l00}; }
    MatchedPsi matched_psi() const noexcept { return {l11 + l10, l11 + l01}; }
    double theta_missing() const noexcept { return l11 + l10; }
    double theta_matched() const noexcept { return l11; }
};

struct CompleteCounts {
    Count n11 = 0;
    Count n10 = 0;
    Count n01 = 0;
    Count n00 = 0;

    bool operator==(const CompleteCounts&) const = default;

    // The missing-data view observes (n11, n01) for respondents; the first
    // index is X, the second R, so n10 + n00 are the nonrespondents.
    MissingTable as_missing() const noexcept { return {n11, n01, n10 + n00}; }
};

inline CompleteCounts draw_complete(const SimTruth& truth, Count n, const ReplicateStream& stream)
{
    auto eng = stream.engine();
    const auto c = draw_multinomial<4>(eng, n, {truth.l11, truth.l10, truth.l01, truth.l00});
    return {c[0], c[1], c[2], c[3]};
}

} // namespace minfer
