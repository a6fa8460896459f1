#include "inewt/rootfind.hpp"

#include <cmath>
#include <stdexcept>

namespace inewt {

std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("geometric_grid: need at least 2 points");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  const double span = hi - lo;
  // Offsets run from span*1e-10 up to span, geometrically spaced.
  constexpr double kSmallest = 1e-10;
  grid.push_back(lo);
  for (int i = 1; i < points; ++i) {
    const double expo = 1.0 - static_cast<double>(i - 1) / static_cast<double>(points - 2);
    grid.push_back(lo + span * std::pow(kSmallest, expo));
  }
  grid.back() = hi;
  return grid;
}

std::optional<Bracket> scan_for_sign_change(const ScalarFn& fn, double lo, double hi,
                                            int points, int refinements) {
  for (int pass = 0; pass <= refinements; ++pass, points *= 4) {
    const std::vector<double> grid = geometric_grid(lo, hi, points);
    double prev_t = grid.front();
    double prev_v = fn(prev_t);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double t = grid[i];
      const double v = fn(t);
      if (prev_v == 0.0) return Bracket{prev_t, prev_t};
      if (v == 0.0) return Bracket{t, t};
      if ((prev_v < 0.0) != (v < 0.0)) return Bracket{prev_t, t};
      prev_t = t;
      prev_v = v;
    }
  }
  return std::nullopt;
}

double bisect(const ScalarFn& fn, double lo, double hi, double tol) {
  double flo = fn(lo);
  double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw std::invalid_argument("bisect: endpoints do not bracket a sign change");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // abscissa resolution exhausted
    const double fmid = fn(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace inewt
