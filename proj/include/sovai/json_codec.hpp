#pragma once

// JSON encoding shared by the CLI and the HTTP service, so both emit the same
// bytes for the same result. Field names are lowerCamel; per-pillar maps are
// keyed "data", "compute", "model", "norms"; numbers are rounded to 12
// significant digits and non-finite values become null.

#include "sovai/analysis.hpp"
#include "sovai/dashboard.hpp"
#include "sovai/scenario_io.hpp"
#include "sovai/solver.hpp"
#include "sovai/weights.hpp"

#include <string>

namespace sovai {

/// Nearest double to x printed with 12 significant digits.
double round12(double x);

/// Canonical text form: two-space indent and a trailing newline.
std::string dumpJson(const Json& value);

Json toJson(const Allocation& a);
Json toJson(const CapacityVector& c);
Json toJson(const WelfareBreakdown& w);
Json toJson(const KktResiduals& k);
Json toJson(const SolutionFlags& f);
Json toJson(const PlannerSolution& s);
Json toJson(const OracleSolution& s);
Json toJson(const OpennessChoice& o);
Json toJson(const GateResult& g, double mu, double alpha);
Json toJson(const WeightResult& w);
Json toJson(const std::vector<ChecklistDecision>& decisions);
Json toJson(const GuardrailResult& g);
Json toJson(const DashboardReport& r);
Json toJson(const SweepTable& t);
Json toJson(const ComparisonReport& r);

/// Reads the optional "options" object of a request; unspecified fields keep
/// the values in `defaults`. Problems are appended to `issues`.
SolveOptions solveOptionsFromJson(const Json* options, const SolveOptions& defaults,
                                  std::vector<ValidationIssue>& issues);

/// { alpha, g, k, lambda, p }; throws ValidationError.
OpennessParams opennessFromJson(const Json& body);

/// Either a bare 2-D array or { "matrix": [[...]] }; throws ValidationError.
PairwiseMatrix matrixFromJson(const Json& body);

/// Whitespace-separated rows; entries may be decimals or fractions "a/b".
/// Throws ValidationError.
PairwiseMatrix matrixFromText(std::string_view text);

}  // namespace sovai
