#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace selfpref {

// Linear-interpolation quantile (R type 7) of an ascending-sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double normal_two_sided_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

// Fixed-point rendering; non-finite values print as "NA".
inline std::string fixed(double v, int decimals) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

// Truncates toward zero at `decimals` places, tolerating representation
// error just below a boundary (e.g. 40.0 stored as 39.99999999999999).
inline double truncate_places(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double x = v * scale;
  return (x >= 0 ? std::floor(x + 1e-9) : std::ceil(x - 1e-9)) / scale;
}

}  // namespace selfpref
