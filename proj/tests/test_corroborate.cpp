#include <cmath>
#include <random>

#include "minfer/corroborate.hpp"
#include "minfer/grid.hpp"
#include "support/asymptotics.hpp"
#include "support/common.hpp"
#include "support/oracles.hpp"

using namespace minfer;
using Catch::Approx;

namespace {

const MissingPsi psi_hat = mle_psi(ocbgt);

CorroborationCurve ocbgt_normal()
{
    return corroboration_normal_curve(psi_hat, 110, make_grid(default_grid()));
}

// v[i] >= min(max_{j<i} v[j], max_{k>i} v[k]) - tol, which is the triple
// condition over every theta_L < theta < theta_U.
bool quasi_concave(const std::vector<double>& v, double tol)
{
    const std::size_t n = v.size();
    std::vector<double> prefix(n), suffix(n);
    for (std::size_t i = 0; i < n; ++i)
        prefix[i] = i == 0 ? v[0] : std::max(prefix[i - 1], v[i]);
    for (std::size_t i = n; i-- > 0;)
        suffix[i] = i + 1 == n ? v[i] : std::max(suffix[i + 1], v[i]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (v[i] < std::min(prefix[i - 1], suffix[i + 1]) - tol)
            return false;
    return true;
}

double mc_tolerance(double p, Count B)
{
    return 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(B)) + 1e-12;
}

} // namespace

TEST_CASE("normal corroboration matches the OCBGT reference values", "[corroborate][normal]")
{
    const double theta[] = {0.2, 0.3, 0.4, 0.5, 0.6};
    const double reference[] = {0.018, 0.583, 0.985, 0.576, 0.028};
    for (int i = 0; i < 5; ++i) {
        INFO("theta = " << theta[i]);
        CHECK(corroboration_normal(psi_hat, 110, theta[i]) == Approx(reference[i]).margin(0.0025));
    }
    CHECK(corroboration_normal(psi_hat, 110, 0.4) == Approx(0.985).margin(0.01));
    CHECK(corroboration_normal(psi_hat, 110, 0.3) == Approx(0.583).margin(0.02));
}

TEST_CASE("normal quadrature agrees with the Owen's T closed form", "[corroborate][normal][oracle]")
{
    const std::pair<MissingPsi, Count> cases[] = {
        {psi_hat, 110},
        {{0.3, 0.5, 0.2}, 100},
        {{0.05, 0.05, 0.9}, 30},
        {{0.7, 0.25, 0.05}, 500},
        {{0.45, 0.1, 0.45}, 2000},
    };
    for (const auto& [psi, n] : cases) {
        for (double theta : make_grid({0.0, 1.0, 0.0025})) {
            const double sd_a = std::sqrt(psi.l11 * (1 - psi.l11) / n);
            const double s = psi.l11 + psi.l_plus0;
            const double sd_s = std::sqrt(s * (1 - s) / n);
            if (std::abs(theta - psi.l11) < 1e-9 * sd_a || std::abs(theta - s) < 1e-9 * sd_s)
                continue;
            INFO("psi = (" << psi.l11 << ", " << psi.l01 << ", " << psi.l_plus0 << "), n = " << n
                           << ", theta = " << theta);
            CHECK(corroboration_normal(psi, n, theta) ==
                  Approx(oracle::normal_corroboration_owen(psi, n, theta)).margin(1e-6));
        }
    }
}

TEST_CASE("normal corroboration at an interior point tends to one", "[corroborate][normal]")
{
    const double theta = psi_hat.l11 + psi_hat.l_plus0 / 2.0;
    CHECK(corroboration_normal(psi_hat, 100000000, theta) >= 0.999);
    const auto boot = corroboration_bootstrap(psi_hat, MissingSizes{100000000}, {theta}, 100000, 3);
    CHECK(boot.values.front() >= 0.999);
}

TEST_CASE("normal corroboration errors", "[corroborate][normal]")
{
    REQUIRE_ERRC(corroboration_normal(MissingPsi{0.0, 0.5, 0.5}, 10, 0.2), Errc::degenerate_variance);
    REQUIRE_ERRC(corroboration_normal(MissingPsi{0.5, 0.5, 0.0}, 10, 0.2), Errc::degenerate_variance);
    REQUIRE_ERRC(corroboration_normal(psi_hat, 110, 1.2), Errc::theta_out_of_domain);
    REQUIRE_ERRC(corroboration_normal(psi_hat, 0, 0.2), Errc::empty_sample);
}

TEST_CASE("bootstrap corroboration on the OCBGT table", "[corroborate][bootstrap]")
{
    const auto curve = corroboration_bootstrap(psi_hat, MissingSizes{110}, {0.2, 0.4}, 5000, 1);
    CHECK(curve.values[0] == Approx(0.018).margin(0.01));
    CHECK(curve.values[1] == Approx(0.985).margin(0.01));
    for (double v : curve.values)
        CHECK(v * 5000 == std::round(v * 5000));
}

TEST_CASE("total missingness corroborates everything", "[corroborate][bootstrap]")
{
    const auto grid = make_grid({0.0, 1.0, 0.05});
    for (Count B : {Count{1}, Count{17}, Count{500}}) {
        const auto curve = corroboration_bootstrap(MissingPsi{0.0, 0.0, 1.0}, MissingSizes{25}, grid, B, 2);
        for (double v : curve.values)
            CHECK(v == 1.0);
    }
}

TEST_CASE("bootstrap agrees with exact enumeration", "[corroborate][bootstrap][oracle]")
{
    const Count B = 20000;
    const auto grid = make_grid({0.2, 0.6, 0.05});
    const auto missing = corroboration_bootstrap(psi_hat, MissingSizes{110}, grid, B, 8);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exact = oracle::exact_corroboration_missing(psi_hat, 110, grid[i]);
        INFO("missing theta = " << grid[i] << " exact " << exact);
        CHECK(std::abs(missing.values[i] - exact) <= mc_tolerance(exact, B));
    }

    const MatchedPsi mpsi{0.6, 0.7};
    const auto mgrid = make_grid({0.2, 0.7, 0.05});
    const auto matched = corroboration_bootstrap(mpsi, MatchedSizes{20, 30}, mgrid, B, 9);
    for (std::size_t i = 0; i < mgrid.size(); ++i) {
        const double exact = oracle::exact_corroboration_matched(mpsi, 20, 30, mgrid[i]);
        INFO("matched theta = " << mgrid[i] << " exact " << exact);
        CHECK(std::abs(matched.values[i] - exact) <= mc_tolerance(exact, B));
    }
}

TEST_CASE("curve value equals the coverage of the replicate regions", "[corroborate][property]")
{
    const MissingPsi psi0{0.3, 0.5, 0.2};
    const double theta0 = 0.35;
    const auto curve = corroboration_bootstrap(psi0, MissingSizes{80}, {0.1, theta0, 0.9}, 4000, 12);
    const auto regions = bootstrap_regions(psi0, MissingSizes{80}, 4000, 12);
    Count covered = 0;
    for (const auto& r : regions)
        covered += r.contains(theta0) ? 1 : 0;
    CHECK(curve.values[1] == static_cast<double>(covered) / 4000.0);
}

TEST_CASE("bootstrap curves are reproducible across thread counts", "[corroborate][determinism]")
{
    const auto grid = make_grid(default_grid());
    const auto a = corroboration_bootstrap(psi_hat, MissingSizes{110}, grid, 5000, 4, 1);
    const auto b = corroboration_bootstrap(psi_hat, MissingSizes{110}, grid, 5000, 4, 3);
    CHECK(a.values == b.values);
    const auto c = corroboration_bootstrap(psi_hat, MissingSizes{110}, grid, 5000, 5, 3);
    CHECK(a.values != c.values);
}

TEST_CASE("corroboration_curve dispatch and fallback", "[corroborate]")
{
    const auto grid = make_grid({0.0, 1.0, 0.1});
    CurveOptions normal{CurveMethod::normal, 200, 1, 0};
    const auto fallback = corroboration_curve(MissingPsi{0.0, 0.0, 1.0}, MissingSizes{10}, grid, normal);
    CHECK(fallback.method == CurveMethod::bootstrap);
    CHECK(fallback.B == 200);
    REQUIRE_ERRC(corroboration_curve(MatchedPsi{0.1, 0.2}, MatchedSizes{5, 5}, grid, normal),
                 Errc::invalid_argument);
    REQUIRE_ERRC(corroboration_curve(MissingPsi{0.3, 0.5, 0.2}, MatchedSizes{5, 5}, grid, CurveOptions{}),
                 Errc::invalid_argument);
    CHECK(observed_corroboration(ocbgt, grid, normal).method == CurveMethod::normal);
}

TEST_CASE("grid validation", "[corroborate]")
{
    REQUIRE_ERRC(corroboration_normal_curve(psi_hat, 110, {}), Errc::invalid_argument);
    REQUIRE_ERRC(corroboration_normal_curve(psi_hat, 110, {0.2, 0.2}), Errc::invalid_argument);
    REQUIRE_ERRC(corroboration_normal_curve(psi_hat, 110, {0.2, 1.1}), Errc::theta_out_of_domain);
    REQUIRE_ERRC(corroboration_bootstrap(psi_hat, MissingSizes{110}, {0.1}, 0, 1), Errc::invalid_argument);
    REQUIRE_ERRC(make_grid({0.0, 1.0, 0.0}), Errc::invalid_argument);
    REQUIRE_ERRC(parse_grid("0:1"), Errc::invalid_argument);
    CHECK(make_grid(parse_grid("0:1:0.005"))[60] == 0.3);
    CHECK(make_grid(default_grid()).size() == 1001);
}

TEST_CASE("asymptotic corroboration limits", "[corroborate][asymptotic]")
{
    CHECK(asymptotic_corroboration(MatchedPsi{0.3, 0.3}, 0.3) == 0.25);
    CHECK(asymptotic_corroboration(MatchedPsi{0.3, 0.3}, 0.0) == 1.0);
    CHECK(asymptotic_corroboration(MatchedPsi{0.1, 0.9}, 0.0) == 0.5);
    CHECK(asymptotic_corroboration(MatchedPsi{0.1, 0.9}, 0.1) == 0.5);
    CHECK(asymptotic_corroboration(MatchedPsi{0.75, 0.625}, 0.375) == 0.5);
    CHECK(asymptotic_corroboration(MatchedPsi{0.75, 0.625}, 0.625) == 0.5);
    CHECK(asymptotic_corroboration(MissingPsi{0.29, 0.49, 0.22}, 0.4) == 1.0);
    CHECK(asymptotic_corroboration(MissingPsi{0.29, 0.49, 0.22}, 0.6) == 0.0);
    CHECK(asymptotic_corroboration(MissingPsi{0.29, 0.49, 0.22}, 0.29) == 0.5);
    CHECK(asymptotic_corroboration(MissingPsi{0.3, 0.5, 0.2}, 0.5) == 0.5);
    CHECK_FALSE(asymptotic_corroboration(MissingPsi{0.0, 0.6, 0.4}, 0.0).has_value());
    CHECK_FALSE(asymptotic_corroboration(MissingPsi{0.6, 0.0, 0.4}, 1.0).has_value());
    CHECK_FALSE(asymptotic_corroboration(MissingPsi{0.4, 0.6, 0.0}, 0.4).has_value());
    CHECK_FALSE(asymptotic_corroboration(MatchedPsi{0.5, 1.0}, 0.5).has_value());
}

TEST_CASE("actual corroboration converges to the large-sample limits", "[corroborate][asymptotic][property]")
{
    const std::vector<Count> schedule{100, 1000, 10000, 100000};
    std::uint64_t seed = 100;
    for (const auto& c : asymptotics::standard_cases()) {
        const double limit = *asymptotic_corroboration(c.psi0, c.theta);
        const double tol = limit == 0.0 || limit == 1.0 ? 0.02 : 0.05;
        const auto out = asymptotics::run_case(c, schedule, 2000, seed, tol);
        seed += 10;
        INFO(c.label << ": limit " << limit << ", values " << out.values[0] << ' ' << out.values[1] << ' '
                     << out.values[2] << ' ' << out.values[3]);
        CHECK(out.trend_ok);
        CHECK(out.final_ok);
    }
}

TEST_CASE("maximum corroboration set", "[corroborate][levelset]")
{
    const auto curve = ocbgt_normal();
    const auto a0 = max_corroboration_set(curve, 0.0);
    CHECK(a0.interval.lower == Approx(0.40).margin(0.01));
    CHECK(a0.interval.upper == Approx(0.40).margin(0.01));
    CHECK(a0.kind == LevelKind::max_set);
    CHECK(a0.c_max >= corroboration_normal(psi_hat, 110, 0.4));
    const auto all = max_corroboration_set(curve, 1.0);
    CHECK(all.interval == ThetaInterval{0.0, 1.0});
    REQUIRE_ERRC(max_corroboration_set(curve, -0.1), Errc::invalid_argument);
}

TEST_CASE("alpha level sets", "[corroborate][levelset]")
{
    const auto curve = ocbgt_normal();
    const auto half = level_set(curve, 0.5);
    CHECK(ThetaInterval{0.29, 0.51}.contains(half.interval));
    CHECK(half.interval.contains(0.3));
    CHECK(half.interval.contains(0.4));
    CHECK(half.interval.contains(0.5));

    const auto tiny = level_set(curve, 1e-300);
    std::size_t first = 0;
    while (curve.values[first] <= 0.0)
        ++first;
    std::size_t last = curve.values.size() - 1;
    while (curve.values[last] <= 0.0)
        --last;
    CHECK(tiny.interval == ThetaInterval{curve.grid[first], curve.grid[last]});

    REQUIRE_ERRC(level_set(curve, 1.0), Errc::empty_level_set);
    REQUIRE_ERRC(level_set(curve, 0.0), Errc::invalid_argument);

    const auto boot = corroboration_bootstrap(psi_hat, MissingSizes{110}, make_grid(default_grid()), 5000, 1);
    const auto bhalf = level_set(boot, 0.5);
    CHECK(ThetaInterval{0.29, 0.51}.contains(bhalf.interval));
    CHECK(bhalf.interval.contains(0.4));
}

TEST_CASE("level sets are nested", "[corroborate][levelset][property]")
{
    std::vector<CorroborationCurve> curves{
        ocbgt_normal(),
        corroboration_normal_curve({0.1, 0.3, 0.6}, 40, make_grid(default_grid())),
        corroboration_bootstrap(psi_hat, MissingSizes{110}, make_grid(default_grid()), 2000, 6),
        corroboration_bootstrap(MatchedPsi{0.6, 0.7}, MatchedSizes{30, 40}, make_grid(default_grid()), 2000, 7),
    };
    std::mt19937_64 eng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& curve : curves) {
        const double top = *std::max_element(curve.values.begin(), curve.values.end());
        for (int i = 0; i < 300; ++i) {
            double a1 = u(eng) * top;
            double a2 = u(eng) * top;
            if (a1 == a2 || a1 <= 0.0 || a2 <= 0.0)
                continue;
            if (a1 < a2)
                std::swap(a1, a2);
            CHECK(level_set(curve, a2).interval.contains(level_set(curve, a1).interval));
            const double h1 = u(eng);
            const double h2 = u(eng);
            CHECK(max_corroboration_set(curve, std::max(h1, h2))
                      .interval.contains(max_corroboration_set(curve, std::min(h1, h2)).interval));
        }
    }
}

TEST_CASE("corroboration curves are quasi-concave", "[corroborate][property]")
{
    const auto grid = make_grid(default_grid());
    const std::pair<MissingPsi, Count> normal_cases[] = {
        {psi_hat, 110}, {{0.3, 0.5, 0.2}, 100}, {{0.05, 0.05, 0.9}, 30}, {{0.7, 0.25, 0.05}, 500}};
    for (const auto& [psi, n] : normal_cases)
        CHECK(quasi_concave(corroboration_normal_curve(psi, n, grid).values, 1e-6));

    const Count B = 5000;
    const double tol = 2.0 / std::sqrt(static_cast<double>(B));
    CHECK(quasi_concave(corroboration_bootstrap(psi_hat, MissingSizes{110}, grid, B, 1).values, tol));
    CHECK(quasi_concave(corroboration_bootstrap(MatchedPsi{0.6, 0.7}, MatchedSizes{300, 400}, grid, B, 2).values, tol));
    CHECK(quasi_concave(corroboration_bootstrap(MatchedPsi{0.1, 0.9}, MatchedSizes{1000, 500}, grid, B, 3).values,
                        tol));
}

TEST_CASE("bootstrap and normal curves agree at the OCBGT estimate", "[method-agreement]")
{
    const auto grid = make_grid({0.05, 0.95, 0.001});
    const auto normal = corroboration_normal_curve(psi_hat, 110, grid);
    const auto boot = corroboration_bootstrap(psi_hat, MissingSizes{110}, grid, 100000, 1);
    double sup = 0.0;
    double at = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = std::abs(normal.values[i] - boot.values[i]);
        if (d > sup) {
            sup = d;
            at = grid[i];
        }
    }
    INFO("sup-norm difference " << sup << " at theta = " << at);
    CHECK(sup < 0.02);
}
