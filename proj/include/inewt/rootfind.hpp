#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace inewt {

using ScalarFn = std::function<double(double)>;

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

// Geometric grid on [lo, hi]: points cluster toward lo so sign changes close
// to the left endpoint are not stepped over. Always includes both endpoints.
std::vector<double> geometric_grid(double lo, double hi, int points);

// Scans a geometric grid for a sign change of fn. On failure the grid is
// refined x4, up to `refinements` times.
std::optional<Bracket> scan_for_sign_change(const ScalarFn& fn, double lo, double hi,
                                            int points = 64, int refinements = 3);

// Bracketing bisection to absolute tolerance `tol` on the abscissa.
// Requires fn(lo) and fn(hi) of opposite sign (or zero at an endpoint).
double bisect(const ScalarFn& fn, double lo, double hi, double tol = 1e-12);

}  // namespace inewt
