// Number formatting shared by the CSV writers, slugs and summary tables.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace bandit {

/// Shortest representation that parses back to the same double.
inline std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, end);
}

/// Rounds half away from zero to `decimals` places and prints exactly that
/// many digits. Uses integer arithmetic after rounding so the output does not
/// depend on printf's rounding mode.
inline std::string fixed(double v, int decimals) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    std::int64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const long long q = std::llround(std::fabs(v) * static_cast<double>(scale));
    std::string out = (v < 0 && q != 0) ? "-" : "";
    out += std::to_string(q / scale);
    if (decimals > 0) {
        std::string frac = std::to_string(q % scale);
        out += '.';
        out.append(static_cast<std::size_t>(decimals) - frac.size(), '0');
        out += frac;
    }
    return out;
}

inline std::string fixed2(double v) { return fixed(v, 2); }

/// Value that fixed2() prints, as a double.
inline double round2(double v) {
    const double q = static_cast<double>(std::llround(std::fabs(v) * 100.0)) / 100.0;
    return v < 0 ? -q : q;
}

/// Strict full-string parse; throws std::invalid_argument naming `what`.
inline double parse_double(std::string_view s, std::string_view what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw std::invalid_argument(std::string(what) + ": '" + std::string(s) + "' is not a number");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, std::string_view what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw std::invalid_argument(std::string(what) + ": '" + std::string(s) +
                                    "' is not a non-negative integer");
    return v;
}

}  // namespace bandit
