#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace affine_snn {

// Shortest round-trip decimal form; identical on every conforming platform.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct ResultRow {
  std::string experiment;
  std::string seed;
  std::string param;
  std::string metric;
  double value = 0.0;
};

inline constexpr const char* result_header = "experiment,seed,param,metric,value";

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << result_header << '\n';
  for (const ResultRow& r : rows)
    out << r.experiment << ',' << r.seed << ',' << r.param << ',' << r.metric << ',' << format_double(r.value) << '\n';
}

// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace affine_snn
