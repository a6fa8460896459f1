#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "inewt/scalar_dynamics.hpp"
#include "support/oracles.hpp"

using namespace inewt;
using oracles::rel_close;

namespace {
const MajorantFunction kQuad = quadratic_majorant(1.0, 0.25);
const Certificate kQuadCert = derive_certificate(kQuad, 0.0);
}  // namespace

TEST_CASE("n_theta at the seed") {
  SUBCASE("theta = 0 is a scalar Newton step on f") {
    const MajorantState next = n_theta_step(kQuad, kQuadCert, 0.0, {0.0, 0.0});
    CHECK(next.t == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(next.eps == 0.0);
  }
  SUBCASE("theta = 0.1") {
    const MajorantState next = n_theta_step(kQuad, kQuadCert, 0.1, {0.0, 0.0});
    CHECK(next.t == doctest::Approx(0.275).epsilon(1e-14));
    CHECK(next.eps == doctest::Approx(0.05).epsilon(1e-14));
  }
}

TEST_CASE("n_theta away from the seed") {
  // f(0.25) = 0.03125, f'(0.25) = -0.75
  const MajorantState next = n_theta_step(kQuad, kQuadCert, 0.0, {0.25, 0.0});
  CHECK(next.t == doctest::Approx(0.29166667).epsilon(1e-8));
  CHECK(next.eps == 0.0);
}

TEST_CASE("n_theta rejects an out-of-tolerance theta") {
  CHECK_THROWS_WITH_AS(n_theta_step(kQuad, kQuadCert, 0.5, {0.0, 0.0}),
                       doctest::Contains("theta_max"), std::invalid_argument);
}

TEST_CASE("n_theta reports leaving the negative-slope region") {
  const MajorantFunction m = smale_majorant(1.0, 0.1);
  const Certificate cert = derive_certificate(m, 0.0);
  // t_bar = 1 - 1/sqrt(2) < 0.5
  CHECK_THROWS_WITH_AS(n_theta_step(m, cert, 0.0, {0.5, 0.0}),
                       doctest::Contains("negative-slope"), std::runtime_error);
}

TEST_CASE("omega membership") {
  CHECK(omega_contains(kQuad, kQuadCert, {0.0, 0.0}).contained);  // the seed
  const OmegaResult inside = omega_contains(kQuad, kQuadCert, {0.275, 0.05});
  CHECK(inside.contained);
  const OmegaResult at_lambda = omega_contains(kQuad, kQuadCert, {kQuadCert.lambda, 0.0});
  CHECK(!at_lambda.contained);
  CHECK(at_lambda.reason == "t < lambda violated");
  const OmegaResult too_much_slack = omega_contains(kQuad, kQuadCert, {0.1, 0.5});
  CHECK(!too_much_slack.contained);
  CHECK(too_much_slack.reason == "eps <= kappa*t violated");
}

TEST_CASE("majorant sequence with theta = 0 is scalar Newton and converges to t*") {
  const MajorantSequence seq = majorant_sequence(kQuad, kQuadCert, 0.0, {0.0, 0.0}, 50);
  CHECK(std::abs(seq.limit_estimate - kQuadCert.t_star) < 1e-9);
  const auto newton = oracles::scalar_newton(kQuad, 0.0, static_cast<int>(seq.states.size()) - 1);
  for (std::size_t k = 0; k < seq.states.size(); ++k) {
    CHECK(rel_close(seq.states[k].t, newton[k], 1e-12));
    CHECK(seq.states[k].eps == 0.0);
  }
}

TEST_CASE("majorant sequence is constant at the fixed point") {
  const double t_star = oracles::quadratic_forms(1.0, 0.25).t_star;
  const MajorantSequence seq = majorant_sequence(kQuad, kQuadCert, 0.0, {t_star, 0.0}, 10);
  CHECK(seq.early_terminated);
  for (const MajorantState& s : seq.states) CHECK(std::abs(s.t - t_star) < 1e-12);
}

TEST_CASE("majorant sequence decays geometrically at theta = 0.1") {
  const MajorantSequence seq = majorant_sequence(kQuad, kQuadCert, 0.1, {0.0, 0.0}, 60);
  const double factor = 0.5 * (1.0 + 0.01);
  double envelope = 0.25;
  for (std::size_t k = 0; k < seq.states.size(); ++k) {
    const MajorantState& s = seq.states[k];
    CHECK(omega_contains(kQuad, kQuadCert, s).contained);
    CHECK(kQuad.value_at(s.t) + s.eps <= envelope * (1.0 + 1e-12));
    envelope *= factor;
    if (k > 0) {
      CHECK(s.t > seq.states[k - 1].t);
      CHECK(s.eps >= seq.states[k - 1].eps);
    }
  }
  CHECK(seq.limit_estimate <= kQuadCert.lambda);
}

TEST_CASE("majorant sequence enforces the length contract") {
  CHECK_THROWS_AS(majorant_sequence(kQuad, kQuadCert, 0.0, {0.0, 0.0}, 10001),
                  std::invalid_argument);
}

TEST_CASE("omega invariance and decay bounds on sampled states") {
  struct Family {
    MajorantFunction m;
    Certificate cert;
  };
  const Family families[] = {
      {kQuad, kQuadCert},
      {smale_majorant(1.0, 0.1), derive_certificate(smale_majorant(1.0, 0.1), 0.0)},
      {self_concordant_majorant(0.15), derive_certificate(self_concordant_majorant(0.15), 0.0)}};
  oracles::TestRng rng(42);
  int checked = 0;
  for (const Family& fam : families) {
    for (int i = 0; i < 200; ++i) {
      const double theta = fam.cert.theta_max * rng.uniform();
      const double t = fam.cert.lambda * rng.uniform() * (1.0 - 1e-9);
      const double lo = std::max(0.0, -fam.m.value_at(t));
      const double hi = fam.cert.kappa * t;
      if (hi <= lo) continue;
      const double eps = lo + (hi - lo) * rng.uniform();
      const MajorantState s{t, eps};
      if (!omega_contains(fam.m, fam.cert, s).contained) continue;
      const double level = fam.m.value_at(t) + eps;
      const MajorantState next = n_theta_step(fam.m, fam.cert, theta, s);
      const double next_level = fam.m.value_at(next.t) + next.eps;
      CHECK(omega_contains(fam.m, fam.cert, next).contained);
      CHECK(next.t > s.t);
      CHECK(next.eps >= s.eps);
      CHECK(next_level < 0.5 * (1.0 + theta * theta) * level);
      CHECK(next_level >= theta * level);
      ++checked;
    }
  }
  CHECK(checked > 500);
}
