#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "affine_snn/error.hpp"
#include "affine_snn/spike.hpp"

namespace affine_snn {

// Potential of a single neuron with ReLU response: sum_i w_i * max(t - a_i, 0).
inline double potential(std::span<const Arrival> arrivals, double t) {
  double p = 0.0;
  for (const Arrival& a : arrivals) p += a.weight * std::max(t - a.time, 0.0);
  return p;
}

// Reference spike time by bisection on the monotone potential. Independent of
// the closed-form solver; used only to check it.
inline double oracle_spike_time(std::span<const Arrival> arrivals, double tolerance = 1e-12) {
  if (arrivals.empty()) throw InvalidParameters("oracle needs at least one arrival");
  double lo = arrivals[0].time, hi = arrivals[0].time, min_w = arrivals[0].weight;
  for (const Arrival& a : arrivals) {
    if (!(a.weight > 0.0)) throw InvalidParameters("oracle requires positive weights");
    lo = std::min(lo, a.time);
    hi = std::max(hi, a.time);
    min_w = std::min(min_w, a.weight);
  }
  // P(lo) = 0 < 1 and P(lo + spread + 1/min_w) >= 1.
  hi = hi + 1.0 / min_w;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (potential(arrivals, mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace affine_snn
