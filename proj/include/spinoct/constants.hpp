#pragma once

#include <numbers>

namespace spinoct {

// Unit system: energies and Hamiltonians in ordinary frequency (GHz), time in
// ns, magnetic fields in tesla. Phases are 2*pi * (GHz) * (ns).
inline constexpr double kBohrMagnetonGHzPerT = 13.9962449;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr const char* kToolVersion = "spinoct 0.1.0";

}  // namespace spinoct
