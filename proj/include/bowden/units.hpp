#pragma once

#include <numbers>

namespace bowden {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

constexpr double deg2rad(double deg) { return deg * (std::numbers::pi / 180.0); }
constexpr double rad2deg(double rad) { return rad * (180.0 / std::numbers::pi); }

/// Weight of a hanging mass in newtons.
constexpr double weight_of(double kilograms) { return kilograms * kStandardGravity; }

}  // namespace bowden
