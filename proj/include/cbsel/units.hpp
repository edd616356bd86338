#pragma once

#include <cmath>
#include <numbers>

namespace cbsel {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double rad) {
  double w = std::fmod(rad + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= kPi;
  return w >= kPi ? -kPi : w;
}

}  // namespace cbsel
