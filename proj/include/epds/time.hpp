#pragma once

#include <cmath>
#include <cstdint>

namespace epds {

/// Simulation time is kept as an integer count of 100 ms samples so that
/// reservation boundaries produced by different code paths compare exactly.
using Tick = std::int64_t;

inline constexpr double kSampleInterval = 0.1;  // seconds per tick

inline constexpr double seconds(Tick t) { return static_cast<double>(t) * kSampleInterval; }

/// Nearest tick; exact inverse of seconds() for any value it produced.
inline Tick to_tick(double s) { return static_cast<Tick>(std::llround(s / kSampleInterval)); }

/// First tick at or after s (with a small tolerance for values that are
/// already on the grid).
inline Tick ceil_tick(double s) {
  return static_cast<Tick>(std::ceil(s / kSampleInterval - 1e-9));
}

}  // namespace epds
