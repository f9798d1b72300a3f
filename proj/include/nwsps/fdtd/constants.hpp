#pragma once

#include <numbers>

namespace nwsps::fdtd {

inline constexpr double kSpeedOfLight = 299792458.0;     // m/s
inline constexpr double kEpsilon0 = 8.8541878128e-12;    // F/m
inline constexpr double kMu0 = 1.25663706212e-6;        // H/m
inline constexpr double kEta0 = kMu0 * kSpeedOfLight;    // ohm
inline constexpr double kPi = std::numbers::pi;

}  // namespace nwsps::fdtd
