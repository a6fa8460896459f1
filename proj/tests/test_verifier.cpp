#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "inewt/verifier.hpp"
#include "support/oracles.hpp"

using namespace inewt;

namespace {
const OperatorProblem kSqrt2 = oracles::sqrt2_problem();
const MajorantFunction kSqrt2Majorant = oracles::sqrt2_majorant();
}  // namespace

TEST_CASE("banach bound attains equality on the quadratic scalar problem") {
  // x = 1.4, t = 0.1: measured 3/2.8, bound 1/(1 - 0.2/3); the two coincide.
  std::vector<std::pair<Vector, double>> samples = {{{1.4}, 0.1}, {{1.5}, 0.0}};
  const ProbeReport report = probe_banach_bound(kSqrt2, kSqrt2Majorant, samples);
  CHECK(report.pass());
  CHECK(report.samples == 2);
  CHECK(std::abs(report.min_slack) < 1e-10);
}

TEST_CASE("banach bound rejects out-of-precondition samples") {
  std::vector<std::pair<Vector, double>> samples = {{{1.4}, 2.0}};  // t >= t_bar
  const ProbeReport report = probe_banach_bound(kSqrt2, kSqrt2Majorant, samples);
  CHECK(report.rejected == 1);
  CHECK(!report.pass());
}

TEST_CASE("linearization bound attains equality at the base point pair") {
  // x = x0 = 1.5, y = 1.4: ||A0^{-1} E_F|| = 0.01/3 = e_f(0.1, 0); the second
  // form gives the same value for the quadratic family.
  std::vector<std::pair<Vector, Vector>> pairs = {{{1.5}, {1.4}}, {{1.4}, {1.4}}};
  const ProbeReport report = probe_linearization_bounds(kSqrt2, kSqrt2Majorant, pairs);
  CHECK(report.pass());
  CHECK(std::abs(report.min_slack) < 1e-10);
}

TEST_CASE("residual envelope bounds at hand-computed points") {
  const LuFactorization base(kSqrt2.jacobian_at(kSqrt2.base_point));
  const double measured = std::abs(base.solve(kSqrt2.residual_at({1.45}))[0]);
  CHECK(measured == doctest::Approx(0.1025 / 3.0).epsilon(1e-12));
  const double f_at = kSqrt2Majorant.value_at(0.05);
  CHECK(-f_at <= measured);
  CHECK(measured <= f_at + 2.0 * 0.05);

  std::vector<Vector> points = {{1.45}, {1.5}};
  const ProbeReport report = probe_residual_envelope(kSqrt2, kSqrt2Majorant, points);
  CHECK(report.pass());
}

TEST_CASE("generated probe suites pass on the scalar and 2-D problems") {
  struct Case {
    OperatorProblem p;
    MajorantFunction m;
  };
  const Case cases[] = {{kSqrt2, kSqrt2Majorant},
                        {oracles::circle_line_problem(), oracles::circle_line_majorant()}};
  for (const Case& c : cases) {
    const auto banach = probe_banach_bound(c.p, c.m, banach_samples(c.p, c.m, 200));
    const auto lin = probe_linearization_bounds(c.p, c.m, linearization_samples(c.p, 200));
    const auto env = probe_residual_envelope(c.p, c.m, envelope_samples(c.p, 200));
    CHECK(banach.pass());
    CHECK(lin.pass());
    CHECK(env.pass());
    CHECK(banach.samples == 200);
  }
}

TEST_CASE("sample generators are reproducible for a fixed seed") {
  const auto a = envelope_samples(kSqrt2, 10, 99);
  const auto b = envelope_samples(kSqrt2, 10, 99);
  const auto c = envelope_samples(kSqrt2, 10, 100);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("scalar error monotonicity (sampled)") {
  oracles::TestRng rng(7);
  for (const MajorantFunction& m :
       {quadratic_majorant(1.0, 0.25), smale_majorant(1.0, 0.1)}) {
    for (int i = 0; i < 500; ++i) {
      const double cap = m.domain_radius * (1.0 - 1e-9);
      const double t = cap * rng.uniform() * 0.7;
      const double s = (cap - t) * rng.uniform();
      const double b = t * rng.uniform();
      const double a = s * rng.uniform();
      CHECK(scalar_linearization_error(m, a + b, b) <=
            scalar_linearization_error(m, t + s, t) + 1e-12);
    }
  }
}

TEST_CASE("trace checks pass on an exact Newton run") {
  SolveConfig cfg;
  cfg.theta = 0.0;
  const IterationTrace trace = inexact_newton_solve(kSqrt2, kSqrt2Majorant, cfg);
  const Vector x_star = reference_zero(kSqrt2, kSqrt2Majorant);
  const TraceCheckBundle bundle =
      check_trace(kSqrt2, kSqrt2Majorant, trace.certificate, trace, x_star);
  CHECK(bundle.all_pass());
  CHECK(bundle.h4_holds);
  CHECK(bundle.qlinear_applicable);  // theta = 0 < kappa/(4+kappa)
  CHECK(bundle.k_membership.pass());
  CHECK(bundle.residual_envelope.pass());
  CHECK(bundle.step_bounds.pass());
  CHECK(bundle.contraction_shifted.pass());
  CHECK(bundle.contraction_base.pass());
}

TEST_CASE("the two contraction forms coincide at rho = 0") {
  SolveConfig cfg;
  cfg.theta = 0.25;
  cfg.step_mode.kind = StepMode::Kind::exact_plus_perturbation;
  const IterationTrace trace = inexact_newton_solve(kSqrt2, kSqrt2Majorant, cfg);
  const Vector x_star = reference_zero(kSqrt2, kSqrt2Majorant);
  const TraceCheckBundle bundle =
      check_trace(kSqrt2, kSqrt2Majorant, trace.certificate, trace, x_star);
  CHECK(bundle.contraction_shifted.pass());
  CHECK(bundle.contraction_base.pass());
  CHECK(bundle.contraction_shifted.min_slack ==
        doctest::Approx(bundle.contraction_base.min_slack).epsilon(1e-12));
}

TEST_CASE("trace checks hold on the perturbed-start branch") {
  SolveConfig cfg;
  cfg.rho = 0.05;
  cfg.start_point = Vector{1.55};
  cfg.step_mode.kind = StepMode::Kind::exact_plus_perturbation;
  cfg.max_iterations = 300;
  cfg.theta = derive_certificate(kSqrt2Majorant, cfg.rho).theta_max;
  const IterationTrace trace = inexact_newton_solve(kSqrt2, kSqrt2Majorant, cfg);
  REQUIRE(trace.converged);
  const Vector x_star = reference_zero(kSqrt2, kSqrt2Majorant);
  const TraceCheckBundle bundle =
      check_trace(kSqrt2, kSqrt2Majorant, trace.certificate, trace, x_star);
  CHECK(bundle.h4_holds);
  CHECK(bundle.k_membership.pass());
  CHECK(bundle.residual_envelope.pass());
  CHECK(bundle.step_bounds.pass());
  // The two composite-contraction forms use genuinely different constants here.
  CHECK(bundle.contraction_shifted.pass());
  CHECK(bundle.contraction_base.pass());
  CHECK(bundle.contraction_shifted.min_slack != bundle.contraction_base.min_slack);
}

TEST_CASE("q-linear ratio bound at theta = 0.05") {
  SolveConfig cfg;
  cfg.theta = 0.05;
  cfg.step_mode.kind = StepMode::Kind::exact_plus_perturbation;
  cfg.max_iterations = 200;
  const IterationTrace trace = inexact_newton_solve(kSqrt2, kSqrt2Majorant, cfg);
  const Certificate& cert = trace.certificate;
  REQUIRE(cfg.theta < cert.qlinear_threshold);
  const Vector x_star = reference_zero(kSqrt2, kSqrt2Majorant);
  const TraceCheckBundle bundle = check_trace(kSqrt2, kSqrt2Majorant, cert, trace, x_star);
  CHECK(bundle.qlinear_applicable);
  CHECK(bundle.qlinear.pass());
  // kappa = 2/3 here, so the ratio constant is 0.525 + 0.1/kappa = 0.675.
  const double bound = 0.5 * (1.0 + cfg.theta) + 2.0 * cfg.theta / cert.kappa;
  CHECK(bound == doctest::Approx(0.675).epsilon(1e-9));
  for (std::size_t k = 0; k + 1 < trace.rows.size(); ++k) {
    if (trace.rows[k].residual_norm < 1e-12 || trace.rows[k + 1].residual_norm < 1e-12) continue;
    const double e0 = std::abs(x_star[0] - trace.rows[k].iterate[0]);
    const double e1 = std::abs(x_star[0] - trace.rows[k + 1].iterate[0]);
    CHECK(e1 <= bound * e0 + 1e-12);
  }
}

TEST_CASE("a doubled step is caught by the membership check at that row") {
  SolveConfig cfg;
  cfg.theta = 0.0;
  const IterationTrace clean = inexact_newton_solve(kSqrt2, kSqrt2Majorant, cfg);
  const Vector x_star = reference_zero(kSqrt2, kSqrt2Majorant);
  REQUIRE(check_trace(kSqrt2, kSqrt2Majorant, clean.certificate, clean, x_star).all_pass());

  IterationTrace corrupted = clean;
  const std::size_t fault = 1;  // double S_1, which lands on row 2
  const double step = corrupted.rows[fault + 1].iterate[0] - corrupted.rows[fault].iterate[0];
  corrupted.rows[fault + 1].iterate[0] = corrupted.rows[fault].iterate[0] + 2.0 * step;
  const TraceCheckBundle bundle =
      check_trace(kSqrt2, kSqrt2Majorant, corrupted.certificate, corrupted, x_star);
  CHECK(!bundle.all_pass());
  REQUIRE(bundle.k_membership.first_violation.has_value());
  CHECK(*bundle.k_membership.first_violation == static_cast<int>(fault) + 1);
}

TEST_CASE("an understated majorant is rejected in-flight or caught after the fact") {
  // b = 0.05 understates ||A0^{-1} F(x0)|| = 1/12, so the residual envelope
  // is violated at step 0.
  const MajorantFunction lying = quadratic_majorant(2.0 / 3.0, 0.05);
  SolveConfig cfg;
  cfg.theta = 0.0;
  CHECK_THROWS_WITH_AS(inexact_newton_solve(kSqrt2, lying, cfg),
                       doctest::Contains("residual envelope"), std::runtime_error);

  cfg.enforce_certificate = false;
  const IterationTrace trace = inexact_newton_solve(kSqrt2, lying, cfg);
  REQUIRE(trace.converged);
  const TraceCheckBundle bundle =
      check_trace(kSqrt2, lying, trace.certificate, trace, {std::sqrt(2.0)});
  CHECK(!bundle.all_pass());
  REQUIRE(bundle.k_membership.first_violation.has_value());
  CHECK(*bundle.k_membership.first_violation == 0);
}

TEST_CASE("certificate/trace provenance is enforced") {
  SolveConfig cfg;
  cfg.theta = 0.0;
  const IterationTrace trace = inexact_newton_solve(kSqrt2, kSqrt2Majorant, cfg);
  const Certificate wrong = derive_certificate(kSqrt2Majorant, 0.01);
  CHECK_THROWS_WITH_AS(check_trace(kSqrt2, kSqrt2Majorant, wrong, trace, {std::sqrt(2.0)}),
                       doctest::Contains("provenance"), std::invalid_argument);
}

TEST_CASE("probes refuse dimensions beyond the contract") {
  OperatorProblem big;
  big.dimension = 51;
  big.base_point.assign(51, 0.0);
  big.domain_radius = 1.0;
  big.residual_at = [](const Vector& x) { return x; };
  big.jacobian_at = [](const Vector& x) { return Matrix::identity(static_cast<int>(x.size())); };
  CHECK_THROWS_AS(probe_banach_bound(big, kSqrt2Majorant, {}), std::invalid_argument);
}
