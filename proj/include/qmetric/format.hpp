#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace qmetric {

/// Floats serialized with 12 significant digits in explicit scientific
/// notation; NaN prints as "nan" (sign stripped for determinism).
inline std::string format_sig12(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

} // namespace qmetric
