#pragma once

#include <array>
#include <complex>
#include <string>

#include "ubopf/errors.hpp"

namespace ubopf {

using Complex = std::complex<double>;

/// Phase of a three-phase system. The ordering a < b < c fixes the
/// row/column layout of every per-phase matrix and vector in the library.
enum class Phase : int { a = 0, b = 1, c = 2 };

inline constexpr std::array<Phase, 3> all_phases{Phase::a, Phase::b, Phase::c};

constexpr int phase_index(Phase p) { return static_cast<int>(p); }

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::a: return "a";
        case Phase::b: return "b";
        case Phase::c: return "c";
    }
    return "?";
}

inline Phase parse_phase(const std::string& s) {
    if (s == "a" || s == "A") return Phase::a;
    if (s == "b" || s == "B") return Phase::b;
    if (s == "c" || s == "C") return Phase::c;
    throw ParseError("invalid phase '" + s + "' (expected a, b or c)");
}

/// Balanced positive-sequence phasor of magnitude `mag`: a at 0 degrees,
/// b at -120, c at +120.
inline Complex balanced_phasor(Phase p, double mag = 1.0) {
    constexpr double kTwoThirdsPi = 2.0943951023931953;  // 2*pi/3
    switch (p) {
        case Phase::a: return {mag, 0.0};
        case Phase::b: return std::polar(mag, -kTwoThirdsPi);
        case Phase::c: return std::polar(mag, kTwoThirdsPi);
    }
    return {mag, 0.0};
}

}  // namespace ubopf
