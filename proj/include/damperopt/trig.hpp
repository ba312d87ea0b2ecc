#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <algorithm>

namespace damperopt {

inline constexpr double pi = std::numbers::pi;

/// sin(π·x) with exact argument reduction: returns exactly 0 at integers and
/// is odd/periodic in x without the rounding error of forming π·x first.
inline double sinpi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0.0) r += 2.0;
  double sign = 1.0;
  if (r >= 1.0) {
    r -= 1.0;
    sign = -1.0;
  }
  if (r > 0.5) r = 1.0 - r;
  if (r == 0.0) return 0.0;
  return sign * std::sin(pi * r);
}

inline double cospi(double x) { return sinpi(x + 0.5); }

/// sin(π·m/d) for integers, reduced in integer arithmetic first so that
/// sin(π·m/d) and sin(π·(d-m)/d) are bitwise equal in magnitude.
inline double sinpi_ratio(std::int64_t m, std::int64_t d) {
  const std::int64_t period = 2 * d;
  m %= period;
  if (m < 0) m += period;
  double sign = 1.0;
  if (m >= d) {
    m -= d;
    sign = -1.0;
  }
  if (2 * m > d) m = d - m;
  if (m == 0) return 0.0;
  return sign * std::sin(pi * static_cast<double>(m) / static_cast<double>(d));
}

/// True when k·p is within rounding distance of an integer, i.e. sin(π·k·p)
/// vanishes up to the representation error of p.
inline bool is_node(double kp) {
  const double frac = std::abs(kp - std::round(kp));
  return frac <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(kp));
}

}  // namespace damperopt
