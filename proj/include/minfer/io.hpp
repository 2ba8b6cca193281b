#pragma once

// CSV and JSON emission. Numbers are written with six decimals; glibc's printf
// rounds the exact binary value, and exact decimal ties go to even.

#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "assure.hpp"
#include "corroborate.hpp"
#include "corroboration_test.hpp"
#include "identify.hpp"
#include "model.hpp"

namespace minfer {

inline std::string fixed6(double x)
{
    if (x == 0.0)
        x = 0.0; // no "-0.000000"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    std::string s(buf);
    if (s == "-0.000000")
        s = "0.000000";
    return s;
}

/// JSON number carrying exactly the six-decimal value.
inline nlohmann::json json6(double x)
{
    return std::stod(fixed6(x));
}

inline std::string to_string(const Rational& r)
{
    return std::to_string(r.num) + "/" + std::to_string(r.den);
}

inline nlohmann::json to_json(const ThetaInterval& i)
{
    return {{"lower", json6(i.lower)}, {"upper", json6(i.upper)}};
}

inline nlohmann::json to_json(const Psi& psi)
{
    if (const auto* p = std::get_if<MissingPsi>(&psi))
        return {{"l11", json6(p->l11)}, {"l01", json6(p->l01)}, {"l_plus0", json6(p->l_plus0)}};
    const auto& m = std::get<MatchedPsi>(psi);
    return {{"l1p", json6(m.l1p)}, {"lp1", json6(m.lp1)}};
}

inline nlohmann::json to_json(const ObservedTable& data)
{
    if (const auto* t = std::get_if<MissingTable>(&data))
        return {{"n11", t->n11}, {"n01", t->n01}, {"n_plus0", t->n_plus0}, {"n", t->size()}};
    const auto& m = std::get<MatchedTable>(data);
    return {{"nx", m.nx}, {"n1", m.n1}, {"ny", m.ny}, {"n2", m.n2}};
}

inline nlohmann::json to_json(const AssuranceReport& r)
{
    nlohmann::json j = {
        {"h", json6(r.h)},
        {"tau_hat", json6(r.tau_hat)},
        {"L_bar", json6(r.L_bar)},
        {"U_bar", json6(r.U_bar)},
        {"B_outer", r.B_outer},
        {"inner_method", method_name(r.inner_method)},
        {"master_seed", r.master_seed},
        {"delta_rule", delta_rule_name(r.delta_rule)},
        {"degenerate_count", r.degenerate_count},
        {"fallback_count", r.fallback_count},
    };
    j["inner_B"] = r.inner_B > 0 ? nlohmann::json(r.inner_B) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const TestResult& r)
{
    nlohmann::json t = r.T == TestStatistic::boundary ? nlohmann::json("boundary")
                                                      : nlohmann::json(r.T == TestStatistic::one ? 1 : 0);
    return {
        {"theta_star", json6(r.theta_star)},
        {"T", t},
        {"observed_corroboration", json6(r.observed_corroboration)},
        {"observed_power", json6(r.observed_power)},
        {"decision", decision_name(r.decision)},
        {"quadrant", quadrant_name(r.quadrant)},
    };
}

/// header `theta,corroboration`, one row per grid point.
inline void write_curve_csv(std::ostream& os, const CorroborationCurve& curve)
{
    os << "theta,corroboration\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        os << fixed6(curve.grid[i]) << ',' << fixed6(curve.values[i]) << '\n';
}

/// Rows `h,tau,L_bar,U_bar`.
inline void write_assurance_csv(std::ostream& os, std::span<const AssuranceReport> reports)
{
    os << "h,tau,L_bar,U_bar\n";
    for (const auto& r : reports)
        os << fixed6(r.h) << ',' << fixed6(r.tau_hat) << ',' << fixed6(r.L_bar) << ',' << fixed6(r.U_bar) << '\n';
}

} // namespace minfer
