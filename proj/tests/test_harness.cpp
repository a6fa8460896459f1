#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "inewt/harness.hpp"
#include "support/oracles.hpp"

using namespace inewt;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "inewt_harness_test";
  std::filesystem::create_directories(dir);
  return dir;
}

bool certificates_identical(const Certificate& a, const Certificate& b) {
  return std::memcmp(&a, &b, sizeof(Certificate)) == 0;
}

}  // namespace

TEST_CASE("builtin corpus has the five documented problems") {
  const auto corpus = builtin_corpus();
  REQUIRE(corpus.size() == 5);
  const char* names[] = {"sqrt2", "circle_line", "exp_analytic", "log_barrier", "poly3"};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(corpus[i].name == names[i]);
    CHECK(validate_majorant(corpus[i].majorant).all_pass());
  }
}

TEST_CASE("sqrt2 entry certifies with theta_max = 1/2") {
  const auto corpus = builtin_corpus();
  const Certificate cert = derive_certificate(corpus[0].majorant, 0.0);
  CHECK(cert.theta_max == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(cert.kappa == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(cert.t_star == doctest::Approx(1.5 - std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("log barrier entry carries the local-norm constants") {
  const auto corpus = builtin_corpus();
  const LoadedProblem& lp = corpus[3];
  CHECK(lp.majorant.family == MajorantFamily::self_concordant);
  CHECK(lp.majorant.param_b == 0.15);  // x0 (x0 - 1) / x0
  CHECK(!lp.problem.norm.is_euclidean());
  CHECK(lp.problem.norm.metric_matrix()(0, 0) == doctest::Approx(1.0 / 1.3225).epsilon(1e-14));
  // b is exactly the measured local-norm residual at the base point.
  const LuFactorization base(lp.problem.jacobian_at(lp.problem.base_point));
  const double measured = lp.problem.norm.norm(base.solve(lp.problem.residual_at(lp.problem.base_point)));
  CHECK(measured == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("exp entry: smallest majorant root by bisection dominates ln(1.1)") {
  const auto corpus = builtin_corpus();
  const Certificate cert = derive_certificate(corpus[2].majorant, 0.0);
  // General-gamma closed form 2 g t^2 - (1 + g b) t + b = 0 at g = 1/2, b = 0.1.
  CHECK(oracles::rel_close(cert.t_star, oracles::smale_t_star(0.5, 0.1), 1e-9));
  CHECK(std::log(1.1) <= cert.t_star);
  // Converges to ln(1.1).
  const Vector x_star = reference_zero(corpus[2].problem, corpus[2].majorant);
  CHECK(std::abs(x_star[0] - std::log(1.1)) < 1e-12);
}

TEST_CASE("problem round-trip reproduces certificates bit-for-bit") {
  const auto corpus = builtin_corpus();
  for (const LoadedProblem& lp : corpus) {
    const auto path = scratch_dir() / (lp.name + ".json");
    write_text_atomic(path.string(), problem_to_json(lp).dump(2) + "\n");
    const LoadedProblem reloaded = load_problem(path.string());
    for (double rho : {0.0, 0.2 * derive_certificate(lp.majorant, 0.0).beta}) {
      const Certificate a = derive_certificate(lp.majorant, rho);
      const Certificate b = derive_certificate(reloaded.majorant, rho);
      CHECK(certificates_identical(a, b));
    }
  }
}

TEST_CASE("shipped problem files match the builtin corpus") {
  const auto corpus = builtin_corpus();
  for (const LoadedProblem& lp : corpus) {
    const std::string path = std::string(PROBLEMS_DIR) + "/" + lp.name + ".json";
    REQUIRE_MESSAGE(std::filesystem::exists(path), path);
    const LoadedProblem from_file = load_problem(path);
    CHECK(certificates_identical(derive_certificate(lp.majorant, 0.0),
                                 derive_certificate(from_file.majorant, 0.0)));
  }
}

TEST_CASE("load rejects an invalid majorant parameter set") {
  json j = builtin_corpus()[0].spec;
  j["majorant"]["b"] = 0.9;  // bL = 0.6
  CHECK_THROWS_WITH_AS(problem_from_json(j), doctest::Contains("bL < 1/2"), std::invalid_argument);
}

TEST_CASE("load rejects missing fields by name") {
  json j = builtin_corpus()[0].spec;
  j.erase("x0");
  CHECK_THROWS_WITH_AS(problem_from_json(j), doctest::Contains("x0"), std::invalid_argument);
}

TEST_CASE("load rejects a domain radius beyond the majorant's domain") {
  json j = builtin_corpus()[0].spec;
  j["domain_radius"] = 2.0;  // majorant lives on [0, 1.5)
  CHECK_THROWS_WITH_AS(problem_from_json(j), doctest::Contains("domain_radius"),
                       std::invalid_argument);
}

TEST_CASE("load rejects understated majorant constants via the spot check") {
  json j = builtin_corpus()[0].spec;
  j["majorant"]["L"] = 0.3;  // true increment ratio is 2/3
  CHECK_THROWS_WITH_AS(problem_from_json(j), doctest::Contains("majorant constant check"),
                       std::invalid_argument);
}

TEST_CASE("custom_builtin family resolves registry entries") {
  json j;
  j["name"] = "alias";
  j["family"] = "custom_builtin";
  j["parameters"] = {{"builtin", "sqrt2"}};
  const LoadedProblem lp = problem_from_json(j);
  CHECK(lp.name == "sqrt2");
  CHECK(lp.problem.dimension == 1);
  json bad = j;
  bad["parameters"]["builtin"] = "nope";
  CHECK_THROWS_WITH_AS(problem_from_json(bad), doctest::Contains("unknown builtin"),
                       std::invalid_argument);
}

TEST_CASE("trace CSV round-trips bit-for-bit") {
  const auto corpus = builtin_corpus();
  SolveConfig cfg;
  cfg.theta = 0.25;
  cfg.step_mode.kind = StepMode::Kind::exact_plus_perturbation;
  const IterationTrace trace = inexact_newton_solve(corpus[0].problem, corpus[0].majorant, cfg);
  const auto path = scratch_dir() / "trace.csv";
  write_trace_csv(path.string(), trace, 1);
  const IterationTrace loaded = read_trace_csv(path.string(), 1);
  REQUIRE(loaded.rows.size() == trace.rows.size());
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    CHECK(loaded.rows[k].iterate[0] == trace.rows[k].iterate[0]);
    CHECK(loaded.rows[k].residual_norm == trace.rows[k].residual_norm);
    CHECK(loaded.rows[k].step_norm == trace.rows[k].step_norm);
    CHECK(loaded.rows[k].t == trace.rows[k].t);
    CHECK(loaded.rows[k].eps == trace.rows[k].eps);
    CHECK(loaded.rows[k].theta == trace.rows[k].theta);
  }
}

TEST_CASE("trace reader rejects files without the header row") {
  const auto path = scratch_dir() / "bad.csv";
  write_text_atomic(path.string(), "1,2,3\n");
  CHECK_THROWS_WITH_AS(read_trace_csv(path.string(), 1), doctest::Contains("header"),
                       std::invalid_argument);
  const auto short_path = scratch_dir() / "short.csv";
  write_text_atomic(short_path.string(),
                    "k,z_0,dist_to_z0,precond_residual,step_norm,achieved_rel_residual,t_k,eps_k,"
                    "theta_k\n0,1.5\n");
  CHECK_THROWS_WITH_AS(read_trace_csv(short_path.string(), 1), doctest::Contains("column"),
                       std::invalid_argument);
}

TEST_CASE("every corpus problem passes the trace checks at theta in {0, half, max}") {
  for (const LoadedProblem& lp : builtin_corpus()) {
    const Certificate cert = derive_certificate(lp.majorant, 0.0);
    const Vector x_star = reference_zero(lp.problem, lp.majorant);
    for (double theta : {0.0, 0.5 * cert.theta_max, cert.theta_max}) {
      SolveConfig cfg;
      cfg.theta = theta;
      cfg.max_iterations = 400;
      cfg.stop_residual = 1e-12;
      if (theta > 0.0) cfg.step_mode.kind = StepMode::Kind::exact_plus_perturbation;
      const IterationTrace trace = inexact_newton_solve(lp.problem, lp.majorant, cfg);
      REQUIRE_MESSAGE(trace.converged, lp.name);
      const TraceCheckBundle bundle =
          check_trace(lp.problem, lp.majorant, trace.certificate, trace, x_star);
      CHECK_MESSAGE(bundle.all_pass(), lp.name << " theta=" << theta);
    }
  }
}

TEST_CASE("iterative inner solves pass the trace checks on the corpus") {
  // Exercises the GMRES path, including the metric-norm transform on the
  // log-barrier problem.
  for (const LoadedProblem& lp : builtin_corpus()) {
    const Certificate cert = derive_certificate(lp.majorant, 0.0);
    SolveConfig cfg;
    cfg.theta = 0.5 * cert.theta_max;
    cfg.max_iterations = 400;
    cfg.stop_residual = 1e-12;
    const IterationTrace trace = inexact_newton_solve(lp.problem, lp.majorant, cfg);
    REQUIRE_MESSAGE(trace.converged, lp.name);
    for (std::size_t k = 0; k + 1 < trace.rows.size(); ++k)
      CHECK(trace.rows[k].achieved_rel_residual <= cfg.theta + 1e-12);
    const Vector x_star = reference_zero(lp.problem, lp.majorant);
    const TraceCheckBundle bundle =
        check_trace(lp.problem, lp.majorant, trace.certificate, trace, x_star);
    CHECK_MESSAGE(bundle.all_pass(), lp.name);
  }
}

TEST_CASE("limit location: ||x* - x0|| <= t* on the corpus") {
  for (const LoadedProblem& lp : builtin_corpus()) {
    const Certificate cert = derive_certificate(lp.majorant, 0.0);
    SolveConfig cfg;
    cfg.theta = 0.0;
    cfg.stop_residual = 1e-13;
    cfg.max_iterations = 300;
    const IterationTrace trace = inexact_newton_solve(lp.problem, lp.majorant, cfg);
    REQUIRE(trace.converged);
    const double dist = lp.problem.norm.norm(sub(trace.rows.back().iterate, lp.problem.base_point));
    CHECK_MESSAGE(dist <= cert.t_star + 1e-9, lp.name);
  }
}

TEST_CASE("multi-start agreement: one zero inside the uniqueness ball (sqrt2)") {
  // Plain Newton from spread-out starts inside B(x0, tau_bar); every run must
  // land on the same zero.
  const OperatorProblem p = oracles::sqrt2_problem();
  for (double start : {0.6, 1.0, 1.9, 2.6}) {
    double x = start;
    for (int i = 0; i < 80; ++i) x = x - (x * x - 2.0) / (2.0 * x);
    CHECK(std::abs(x - std::sqrt(2.0)) < 1e-12);
  }
  CHECK(p.domain_radius == 1.5);  // tau_bar = R for this majorant
}

TEST_CASE("certificate text lists every constant") {
  const Certificate cert = derive_certificate(builtin_corpus()[0].majorant, 0.0);
  const std::string text = certificate_text(cert);
  for (const char* key : {"rho", "beta", "t_star", "tau_bar", "t_bar", "kappa", "lambda",
                          "theta_max", "qlinear_threshold"})
    CHECK(text.find(key) != std::string::npos);
}

TEST_CASE("sweep writes per-cell files and a merged table") {
  const auto corpus = builtin_corpus();
  const auto dir = scratch_dir() / "sweep";
  std::filesystem::remove_all(dir);
  SweepOptions options;
  options.theta_count = 3;
  options.rho_count = 2;
  run_sweep(corpus[0], options, dir.string());
  CHECK(std::filesystem::exists(dir / "sweep.csv"));
  int cells = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().filename().string().rfind("cell_", 0) == 0) ++cells;
  CHECK(cells == 6);
  std::ifstream in(dir / "sweep.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("rho,theta", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    // converged and trace_ok flags are the trailing ",1,<residual>,1"
    CHECK(line.substr(line.size() - 1) == "1");
  }
  CHECK(rows == 6);
}
