#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace spdc {

// Speed of light in mm/ps.
inline constexpr double kSpeedOfLight = 0.299792458;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// All user-facing numbers are serialized with 12 significant digits.
inline std::string format_sig12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

// Round a double to its 12-significant-digit representation. Used to
// canonicalize configuration input so that echoed metadata is a fixed
// point: re-running from a metadata file reproduces identical output.
inline double round_sig12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

inline double sinc(double x) {
    if (x > -1e-4 && x < 1e-4) {
        double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

}  // namespace spdc
