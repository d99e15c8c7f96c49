#pragma once

#include <numbers>

namespace optomech::constants {

inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_B = 1.380649e-23;            // J / K
inline constexpr double c = 2.99792458e8;              // m / s
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace optomech::constants
