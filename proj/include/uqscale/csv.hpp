#ifndef UQSCALE_CSV_HPP
#define UQSCALE_CSV_HPP

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace uqscale::csv {

/// Shortest-round-trip decimal rendering of a double, so that repeated runs
/// produce byte-identical files.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // try shorter representations first
    for (int prec = 1; prec <= 16; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

inline void write_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) os << ',';
    os << cols[i];
  }
  os << '\n';
}

}  // namespace uqscale::csv

#endif
