#pragma once
#include <string>

// Unit handling. All angular frequencies are stored internally in rad/s;
// quantities read from config files carry explicit unit suffixes ("4.98 GHz",
// "40 ns", "119 fJ") and are converted on parse. Plain numbers are accepted
// only where a quantity is dimensionless.
namespace pwg::units {

inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double speed_of_light = 2.99792458e8; // m/s
inline constexpr double two_pi = 6.283185307179586476925286766559;

// "4.98 GHz" -> 2*pi*4.98e9 rad/s. Accepts Hz/kHz/MHz/GHz (cyclic, scaled by
// 2*pi) and "rad/s" (taken as-is). Throws std::invalid_argument otherwise.
double angular_frequency(const std::string& text);

// "40 ns" -> 4e-8 s. Accepts s/ms/us/ns/ps.
double duration(const std::string& text);

// "119 fJ" -> 1.19e-13 J. Accepts J/mJ/uJ/nJ/pJ/fJ/aJ.
double energy(const std::string& text);

// "92 um" -> 9.2e-5 m. Accepts m/mm/um/nm.
double length(const std::string& text);

// "2166 m/s" -> 2166.0.
double velocity(const std::string& text);

// Plain number with no suffix. Rejects any trailing unit.
double dimensionless(const std::string& text);

// rad/s -> cyclic Hz, for output.
inline double to_hz(double angular) { return angular / two_pi; }

}  // namespace pwg::units
