#pragma once

#include <cmath>
#include <stdexcept>

#include "qmetric/errors.hpp"

namespace qmetric {

/// Bisection for a root of g in [lo, hi]; requires a sign change.
/// Returns the midpoint of the final bracket (width <= tol).
/// If g evaluates to exactly zero at a probe point, that point is returned.
template <class G>
double bisect_root(G&& g, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("bisect_root: tol must be positive");
  if (!(lo < hi)) throw std::invalid_argument("bisect_root: empty interval");
  double flo = g(lo);
  double fhi = g(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(flo * fhi < 0.0)) throw bracket_error("bisect_root: no sign change on [lo, hi]");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break; // interval at rounding resolution
    const double fmid = g(mid);
    if (fmid == 0.0) return mid;
    if (flo * fmid < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace qmetric
