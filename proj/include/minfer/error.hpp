#pragma once

#include <stdexcept>
#include <string>

namespace minfer {

enum class Errc {
    negative_count,
    inconsistent_totals,
    empty_sample,
    theta_out_of_domain,
    degenerate_variance,
    empty_level_set,
    no_qualifying_h,
    boundary_theta,
    invalid_argument,
};

inline const char* errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::negative_count: return "NegativeCount";
    case Errc::inconsistent_totals: return "InconsistentTotals";
    case Errc::empty_sample: return "EmptySample";
    case Errc::theta_out_of_domain: return "ThetaOutOfDomain";
    case Errc::degenerate_variance: return "DegenerateVariance";
    case Errc::empty_level_set: return "EmptyLevelSet";
    case Errc::no_qualifying_h: return "NoQualifyingH";
    case Errc::boundary_theta: return "BoundaryTheta";
    case Errc::invalid_argument: return "InvalidArgument";
    }
    return "Unknown";
}

// Validation-type errors map to CLI exit code 1, numeric failures to 2.
inline bool is_validation_error(Errc code) noexcept
{
    switch (code) {
    case Errc::negative_count:
    case Errc::inconsistent_totals:
    case Errc::empty_sample:
    case Errc::theta_out_of_domain:
    case Errc::boundary_theta:
    case Errc::invalid_argument:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
    {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace minfer
