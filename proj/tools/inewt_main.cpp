#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "inewt/harness.hpp"
#include "inewt/majorant.hpp"
#include "inewt/solver.hpp"
#include "inewt/verifier.hpp"

namespace {

using namespace inewt;

Vector parse_point(const std::string& text) {
  Vector out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(std::stod(field));
  return out;
}

int cmd_certify(const std::string& path, double rho) {
  const LoadedProblem lp = load_problem(path);
  const ValidationReport report = validate_majorant(lp.majorant);
  for (const CheckEntry& check : report.checks)
    std::cout << check.name << ": " << (check.pass ? "pass" : "FAIL") << " (" << check.detail
              << ")\n";
  if (!report.all_pass()) {
    std::cout << "certificate: not derived (hypothesis checks failed)\n";
    return 1;
  }
  const Certificate cert = derive_certificate(lp.majorant, rho);
  std::cout << certificate_text(cert);
  return 0;
}

int cmd_solve(const std::string& path, const SolveConfig& cfg, const std::string& trace_out) {
  const LoadedProblem lp = load_problem(path);
  const IterationTrace trace = cfg.schedule == ThetaSchedule::adaptive
                                   ? adaptive_theta_solve(lp.problem, lp.majorant, cfg)
                                   : inexact_newton_solve(lp.problem, lp.majorant, cfg);
  const TraceRow& last = trace.rows.back();
  std::cout << "problem: " << lp.name << "\n"
            << "iterations: " << last.k << "\n"
            << "converged: " << (trace.converged ? "yes" : "no") << " (" << trace.termination
            << ")\n"
            << "final_residual: " << last.residual_norm << "\n";
  std::cout << "final_iterate:";
  for (double v : last.iterate) std::printf(" %.17g", v);
  std::cout << "\n";
  if (!trace_out.empty()) {
    write_trace_csv(trace_out, trace, lp.problem.dimension);
    std::cout << "trace: " << trace_out << "\n";
  }
  return trace.converged ? 0 : 1;
}

int cmd_verify(const std::string& path, const std::string& trace_in) {
  const LoadedProblem lp = load_problem(path);
  IterationTrace trace = read_trace_csv(trace_in, lp.problem.dimension);
  // The perturbation radius is recovered from the recorded start point; the
  // resulting certificate is the tightest one the trace can be held to.
  trace.rho = lp.problem.norm.norm(sub(trace.rows.front().iterate, lp.problem.base_point));
  const Certificate cert = derive_certificate(lp.majorant, trace.rho);
  const Vector x_star = reference_zero(lp.problem, lp.majorant);
  const TraceCheckBundle bundle = check_trace(lp.problem, lp.majorant, cert, trace, x_star);

  std::cout << probe_report_text(bundle.k_membership) << "\n"
            << probe_report_text(bundle.residual_envelope) << "\n"
            << probe_report_text(bundle.step_bounds) << "\n"
            << probe_report_text(bundle.contraction_shifted) << "\n"
            << probe_report_text(bundle.contraction_base) << "\n";
  if (bundle.qlinear_applicable)
    std::cout << probe_report_text(bundle.qlinear) << "\n";
  else
    std::cout << "qlinear: not applicable (theta >= kappa/(4+kappa))\n";

  const auto banach = probe_banach_bound(lp.problem, lp.majorant,
                                         banach_samples(lp.problem, lp.majorant, 200));
  const auto lin = probe_linearization_bounds(lp.problem, lp.majorant,
                                              linearization_samples(lp.problem, 200));
  const auto env = probe_residual_envelope(lp.problem, lp.majorant,
                                           envelope_samples(lp.problem, 200));
  std::cout << probe_report_text(banach) << "\n"
            << probe_report_text(lin) << "\n"
            << probe_report_text(env) << "\n";

  const bool ok = bundle.all_pass() && banach.pass() && lin.pass() && env.pass();
  std::cout << (ok ? "verify: PASS" : "verify: FAIL") << "\n";
  return ok ? 0 : 1;
}

int cmd_probe(const std::string& path, int samples, std::uint64_t seed, const std::string& out) {
  const LoadedProblem lp = load_problem(path);
  const auto banach = probe_banach_bound(lp.problem, lp.majorant,
                                         banach_samples(lp.problem, lp.majorant, samples, seed));
  const auto lin = probe_linearization_bounds(lp.problem, lp.majorant,
                                              linearization_samples(lp.problem, samples, seed));
  const auto env = probe_residual_envelope(lp.problem, lp.majorant,
                                           envelope_samples(lp.problem, samples, seed));
  std::ostringstream text;
  text << probe_report_text(banach) << "\n"
       << probe_report_text(lin) << "\n"
       << probe_report_text(env) << "\n";
  std::cout << text.str();
  if (!out.empty()) write_text_atomic(out, text.str());
  return banach.pass() && lin.pass() && env.pass() ? 0 : 1;
}

int cmd_sweep(const std::string& path, const SweepOptions& options, const std::string& out_dir) {
  const LoadedProblem lp = load_problem(path);
  run_sweep(lp, options, out_dir);
  std::cout << "sweep written to " << out_dir << "/sweep.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact Newton solver with semilocal convergence certificates"};
  app.require_subcommand(1);

  std::string problem_path;
  double rho = 0.0;

  auto* certify = app.add_subcommand("certify", "Validate hypotheses and print the certificate");
  certify->add_option("problem", problem_path, "Problem file (JSON)")->required();
  certify->add_option("--rho", rho, "Perturbation radius (default 0)");

  SolveConfig cfg;
  std::string start_text;
  std::string trace_out;
  bool adaptive = false;
  auto* solve = app.add_subcommand("solve", "Run the inexact Newton iteration");
  solve->add_option("problem", problem_path, "Problem file (JSON)")->required();
  solve->add_option("--theta", cfg.theta, "Relative residual tolerance")->required();
  solve->add_option("--rho", cfg.rho, "Perturbation radius (default 0)");
  solve->add_option("--start", start_text, "Start point z0, comma separated");
  solve->add_flag("--adaptive", adaptive, "Adaptive schedule theta_k = min(theta_max, r_k)");
  solve->add_option("--max-iter", cfg.max_iterations, "Iteration cap (default 100)");
  solve->add_option("--stop-residual", cfg.stop_residual,
                    "Preconditioned residual floor (default 1e-13)");
  solve->add_option("--trace", trace_out, "Write the iteration trace CSV here");

  std::string trace_in;
  auto* verify = app.add_subcommand("verify", "Check a trace against the certificate envelopes");
  verify->add_option("problem", problem_path, "Problem file (JSON)")->required();
  verify->add_option("--trace", trace_in, "Trace CSV produced by solve")->required();

  int samples = 500;
  std::uint64_t seed = inewt::kDefaultProbeSeed;
  std::string probe_out;
  auto* probe = app.add_subcommand("probe", "Run the majorant inequality probes");
  probe->add_option("problem", problem_path, "Problem file (JSON)")->required();
  probe->add_option("--samples", samples, "Samples per probe (default 500)");
  probe->add_option("--seed", seed, "Sampling seed (default 1729)");
  probe->add_option("--out", probe_out, "Also write the reports to this file");

  SweepOptions sweep_options;
  std::string out_dir;
  std::string grid_text;
  auto* sweep = app.add_subcommand("sweep", "theta x rho sweep tables");
  sweep->add_option("problem", problem_path, "Problem file (JSON)")->required();
  sweep->add_option("--grid", grid_text, "Grid as <theta_count>x<rho_count> (default 9x5)");
  sweep->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (certify->parsed()) return cmd_certify(problem_path, rho);
    if (solve->parsed()) {
      if (!start_text.empty()) cfg.start_point = parse_point(start_text);
      if (adaptive) cfg.schedule = ThetaSchedule::adaptive;
      return cmd_solve(problem_path, cfg, trace_out);
    }
    if (verify->parsed()) return cmd_verify(problem_path, trace_in);
    if (probe->parsed()) return cmd_probe(problem_path, samples, seed, probe_out);
    if (sweep->parsed()) {
      if (!grid_text.empty()) {
        const auto x_at = grid_text.find('x');
        if (x_at == std::string::npos) throw std::invalid_argument("--grid must look like 9x5");
        sweep_options.theta_count = std::stoi(grid_text.substr(0, x_at));
        sweep_options.rho_count = std::stoi(grid_text.substr(x_at + 1));
      }
      return cmd_sweep(problem_path, sweep_options, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
