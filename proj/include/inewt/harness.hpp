#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "inewt/majorant.hpp"
#include "inewt/problem.hpp"
#include "inewt/solver.hpp"
#include "inewt/verifier.hpp"

namespace inewt {

/// A problem file resolved into evaluators plus its majorant. `spec` is the
/// normalized on-disk form; serializing it and loading the result reproduces
/// identical certificates bit-for-bit on the same platform.
struct LoadedProblem {
  std::string name;
  OperatorProblem problem;
  MajorantFunction majorant;
  nlohmann::json spec;
};

// Families are selected by tag; evaluators are built in, never loaded as code.
// Throws std::invalid_argument naming the offending field on schema
// violations and on majorant-constant spot-check failures.
LoadedProblem problem_from_json(const nlohmann::json& j);
LoadedProblem load_problem(const std::string& path);
nlohmann::json problem_to_json(const LoadedProblem& lp);

// Checks the declared majorant constants against the operator on sampled
// pairs: the measured derivative increment must not exceed the majorant
// increment by more than 1e-6 relative. Throws on violation.
void spot_check_majorant(const OperatorProblem& p, const MajorantFunction& m, int pairs = 100,
                         std::uint64_t seed = 7);

// Built-in corpus: sqrt2 scalar, 2-D circle/line system, exponential shift
// (analytic majorant), scalar log barrier (self-concordant, local metric
// norm), and a 3-D polynomial system with a stored Lipschitz constant.
std::vector<LoadedProblem> builtin_corpus();

// Trace export: one record per iteration, comma separated with a header row.
void write_trace_csv(const std::string& path, const IterationTrace& trace, int dimension);
IterationTrace read_trace_csv(const std::string& path, int dimension);

std::string certificate_text(const Certificate& cert);
std::string probe_report_text(const ProbeReport& report);

// Writes via a temporary file then renames into place.
void write_text_atomic(const std::string& path, const std::string& content);

struct SweepOptions {
  int theta_count = 9;  // linearly spaced in [0, theta_max(rho)]
  int rho_count = 5;    // linearly spaced in [0, 0.9 * beta/2]
};

// theta x rho sweep: one CSV row per cell (written atomically per cell, then
// merged into <out_dir>/sweep.csv).
void run_sweep(const LoadedProblem& lp, const SweepOptions& options, const std::string& out_dir);

}  // namespace inewt
