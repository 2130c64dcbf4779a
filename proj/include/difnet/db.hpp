#pragma once

#include <algorithm>
#include <cmath>

namespace difnet {

/// Values are clamped here before taking logs so noise-free runs stay finite.
inline constexpr double kDbFloor = 1e-30;

inline double to_db(double linear) { return 10.0 * std::log10(std::max(linear, kDbFloor)); }

}  // namespace difnet
