#include "inewt/scalar_dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace inewt {

namespace {
constexpr double kSequenceFloor = 1e-15;
constexpr int kMaxSequenceLength = 10000;
// Derived thresholds carry the root-finding tolerance; comparisons against
// them get a matching sliver of slack.
bool within_theta_cap(double theta, double cap) { return theta <= cap * (1.0 + 1e-10) + 1e-14; }
}  // namespace

OmegaResult omega_contains(const MajorantFunction& m, const Certificate& cert,
                           const MajorantState& s) {
  if (!(s.t >= 0.0)) return {false, "t >= 0 violated"};
  if (!(s.t < cert.lambda)) return {false, "t < lambda violated"};
  if (!(s.eps >= 0.0)) return {false, "eps >= 0 violated"};
  if (!(s.eps <= cert.kappa * s.t)) return {false, "eps <= kappa*t violated"};
  if (!(m.value_at(s.t) + s.eps > 0.0)) return {false, "f(t) + eps > 0 violated"};
  return {true, ""};
}

MajorantState n_theta_step(const MajorantFunction& m, const Certificate& cert, double theta,
                           const MajorantState& s) {
  if (theta < 0.0 || !std::isfinite(theta))
    throw std::invalid_argument("n_theta_step: theta must be >= 0");
  if (!within_theta_cap(theta, cert.theta_max)) {
    std::ostringstream os;
    os << "n_theta_step: theta = " << theta << " exceeds theta_max = " << cert.theta_max;
    throw std::invalid_argument(os.str());
  }
  const double slope = m.derivative_at(s.t);
  if (!(slope < 0.0)) {
    std::ostringstream os;
    os << "n_theta_step: left the negative-slope region (f'(" << s.t << ") = " << slope << ")";
    throw std::runtime_error(os.str());
  }
  const double level = m.value_at(s.t) + s.eps;
  MajorantState next;
  next.t = s.t - (1.0 + theta) * level / slope;
  next.eps = s.eps + 2.0 * theta * level;
  return next;
}

MajorantSequence majorant_sequence(const MajorantFunction& m, const Certificate& cert,
                                   double theta, const MajorantState& s0, int k_max) {
  if (k_max < 0 || k_max > kMaxSequenceLength)
    throw std::invalid_argument("majorant_sequence: k_max must lie in [0, 10000]");
  MajorantSequence seq;
  seq.termination_floor = kSequenceFloor;
  seq.states.reserve(static_cast<std::size_t>(k_max) + 1);
  seq.states.push_back(s0);
  MajorantState s = s0;
  for (int k = 0; k < k_max; ++k) {
    if (m.value_at(s.t) + s.eps < kSequenceFloor) {
      seq.early_terminated = true;
      break;
    }
    s = n_theta_step(m, cert, theta, s);
    seq.states.push_back(s);
  }
  seq.limit_estimate = seq.states.back().t;
  return seq;
}

}  // namespace inewt
