#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace affthermo {

/// Numbers in reports and CSV files: 12 significant digits, "-inf"/"inf"
/// for infinities.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace affthermo
