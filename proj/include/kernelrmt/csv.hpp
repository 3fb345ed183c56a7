#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace kernelrmt {

// 17 significant digits: round-trips every double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_row(const std::vector<double>& values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  line += '\n';
  return line;
}

}  // namespace kernelrmt
