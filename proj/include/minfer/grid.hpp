#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace minfer {

// Equispaced theta grid over a sub-range of [0, 1].
struct GridSpec {
    double start = 0.0;
    double stop = 1.0;
    double step = 0.001;
};

namespace detail {

// Removes accumulated binary noise so i * 0.005 at i = 60 is the literal 0.3.
inline double snap(double x) noexcept
{
    return std::round(x * 1e12) / 1e12;
}

} // namespace detail

inline std::vector<double> make_grid(const GridSpec& spec)
{
    if (!(spec.step > 0.0))
        throw Error(Errc::invalid_argument, "grid step must be > 0");
    if (!(spec.start >= 0.0 && spec.stop <= 1.0 && spec.start <= spec.stop))
        throw Error(Errc::invalid_argument, "grid must satisfy 0 <= start <= stop <= 1");
    const auto count = static_cast<std::size_t>(std::floor((spec.stop - spec.start) / spec.step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        grid.push_back(detail::snap(spec.start + static_cast<double>(i) * spec.step));
    return grid;
}

inline GridSpec default_grid() noexcept
{
    return {0.0, 1.0, 0.001};
}

/// Parses "start:stop:step".
inline GridSpec parse_grid(std::string_view text)
{
    const auto first = text.find(':');
    const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
    if (second == std::string_view::npos)
        throw Error(Errc::invalid_argument, "grid must be written start:stop:step, got '" + std::string(text) + "'");
    auto number = [&](std::string_view part) {
        try {
            std::size_t used = 0;
            const double v = std::stod(std::string(part), &used);
            if (used != part.size())
                throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw Error(Errc::invalid_argument, "bad number '" + std::string(part) + "' in grid");
        }
    };
    GridSpec spec{number(text.substr(0, first)), number(text.substr(first + 1, second - first - 1)),
                  number(text.substr(second + 1))};
    make_grid(spec); // validates
    return spec;
}

} // namespace minfer
