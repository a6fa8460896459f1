#pragma once

#include <string>
#include <vector>

#include "inewt/majorant.hpp"

namespace inewt {

/// Scalar shadow of the vector iteration: majorant abscissa t and accumulated
/// residual slack eps. The seed (0, 0) is admissible.
struct MajorantState {
  double t = 0.0;
  double eps = 0.0;
};

struct OmegaResult {
  bool contained = false;
  std::string reason;  // names the first violated condition when not contained
};

// Membership in Omega: 0 <= t < lambda, 0 <= eps <= kappa*t, f(t) + eps > 0.
OmegaResult omega_contains(const MajorantFunction& m, const Certificate& cert,
                           const MajorantState& s);

// One step of the auxiliary map
//   n_theta(t, eps) = (t - (1+theta)(f(t)+eps)/f'(t), eps + 2 theta (f(t)+eps)).
// Throws when theta exceeds the certificate's theta_max or when f'(t) >= 0.
MajorantState n_theta_step(const MajorantFunction& m, const Certificate& cert, double theta,
                           const MajorantState& s);

struct MajorantSequence {
  std::vector<MajorantState> states;
  double limit_estimate = 0.0;     // final t
  bool early_terminated = false;   // stopped because f(t) + eps fell below the floor
  double termination_floor = 0.0;
};

// Iterates n_theta_step from s0 for at most k_max steps (k_max <= 10^4),
// stopping early once f(t) + eps < 1e-15.
MajorantSequence majorant_sequence(const MajorantFunction& m, const Certificate& cert,
                                   double theta, const MajorantState& s0, int k_max);

}  // namespace inewt
