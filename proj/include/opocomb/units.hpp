#pragma once

#include <numbers>

// Library structs carry SI values (seconds, rad/s, Hz). Files and the command
// line use picoseconds and MHz; these helpers are the only place the two meet.
namespace opocomb::units
{

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double ln2 = std::numbers::ln2;

constexpr double ps_to_s(double ps) { return ps * 1e-12; }
constexpr double s_to_ps(double s) { return s * 1e12; }

// angular frequency (rad/s) <-> cyclic frequency in MHz
constexpr double mhz_to_rad_per_s(double mhz) { return two_pi * mhz * 1e6; }
constexpr double rad_per_s_to_mhz(double w) { return w / (two_pi * 1e6); }

constexpr double mhz_to_hz(double mhz) { return mhz * 1e6; }
constexpr double hz_to_mhz(double hz) { return hz * 1e-6; }

} // namespace opocomb::units
