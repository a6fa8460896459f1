#pragma once

#include <functional>
#include <string>
#include <vector>

namespace inewt {

enum class MajorantFamily { quadratic, smale, self_concordant, custom };

/// Scalar convex model f on [0, R) with f(0) > 0, f'(0) = -1 whose derivative
/// increments dominate those of the preconditioned operator. All convergence
/// constants are derived from this object.
struct MajorantFunction {
  double domain_radius = 0.0;                    // R
  std::function<double(double)> value_at;        // f(t),    t in [0, R)
  std::function<double(double)> derivative_at;   // f'(t),   t in [0, R)
  std::function<double(double)> left_second_at;  // D^- f'(t), t in (0, R)
  MajorantFamily family = MajorantFamily::custom;
  double param_primary = 0.0;  // L for quadratic, gamma for smale
  double param_b = 0.0;        // b = f(0) for the canonical families
};

// Canonical families. Parameter-domain violations throw std::invalid_argument
// naming the violated inequality.
//   quadratic:       f(t) = (L/2) t^2 - t + b       on [0, 1/L),  needs bL < 1/2
//   smale:           f(t) = t/(1 - g t) - 2t + b    on [0, 1/g),  needs gb < 3 - 2*sqrt(2)
//   self_concordant: f(t) = t/(1 - t) - 2t + b      on [0, 1),    needs b  < 3 - 2*sqrt(2)
MajorantFunction quadratic_majorant(double lipschitz, double b);
MajorantFunction smale_majorant(double gamma, double b);
MajorantFunction self_concordant_majorant(double b);
MajorantFunction make_canonical(MajorantFamily family, double param_primary, double b);

// Custom majorant; when left_second is not supplied it defaults to a central
// finite difference of the derivative with step 1e-6 * max(1, t).
MajorantFunction custom_majorant(double domain_radius, std::function<double(double)> value,
                                 std::function<double(double)> derivative,
                                 std::function<double(double)> left_second = {});

/// Convergence constants for a perturbation radius rho. Fields beta, t_star,
/// tau_bar, t_bar are properties of the base majorant; kappa, lambda and the
/// theta thresholds are computed against the start-shifted majorant and reduce
/// to the base quantities at rho = 0.
struct Certificate {
  double rho = 0.0;
  double beta = 0.0;                // sup -f over [0, R)
  double t_star = 0.0;              // smallest root of f
  double tau_bar = 0.0;             // sup { t : f(t) < 0 }
  double t_bar = 0.0;               // sup { t : f'(t) < 0 }
  double kappa = 0.0;
  double lambda = 0.0;
  double theta_max = 0.0;           // kappa / (2 - kappa)
  double qlinear_threshold = 0.0;   // kappa / (4 + kappa)
};

struct CheckEntry {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckEntry> checks;
  bool all_pass() const;
  const CheckEntry* find(const std::string& name) const;
};

// Hypothesis checks h1-h3 plus finite-difference consistency of f', evaluated
// on a grid of `grid_size` points (midpoint convexity stands in for convexity
// of f'; the checks are necessarily grid-based). Failures are report entries,
// not exceptions.
ValidationReport validate_majorant(const MajorantFunction& m, int grid_size = 1024);

// Derives all certificate constants numerically (bracketed bisection,
// tolerance 1e-12 on t). Throws std::invalid_argument when rho >= beta/2 and
// std::runtime_error when h3 cannot be verified numerically.
Certificate derive_certificate(const MajorantFunction& m, double rho = 0.0);

// Start-shifted majorant g(t) = -[f(t + rho) + 2 rho] / f'(rho) on [0, R - rho).
// g'(0) = -1 holds exactly by construction. rho = 0 returns m unchanged.
MajorantFunction shift_majorant(const MajorantFunction& m, double rho);

// e_f(v, t) = f(v) - [f(t) + f'(t) (v - t)]; nonnegative for v >= t.
double scalar_linearization_error(const MajorantFunction& m, double v, double t);

}  // namespace inewt
