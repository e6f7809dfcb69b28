#pragma once

#include <numbers>

namespace srlaser {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Config files state ordinary frequencies (X/2pi); the simulator runs on
// angular frequencies throughout.
constexpr double mhz_to_angular(double mhz) { return kTwoPi * mhz * 1e6; }
constexpr double khz_to_angular(double khz) { return kTwoPi * khz * 1e3; }
constexpr double angular_to_hz(double w) { return w / kTwoPi; }
constexpr double angular_to_mhz(double w) { return w / kTwoPi * 1e-6; }

constexpr double us_to_s(double us) { return us * 1e-6; }
constexpr double ns_to_s(double ns) { return ns * 1e-9; }

}  // namespace srlaser
