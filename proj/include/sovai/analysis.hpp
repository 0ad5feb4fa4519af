#pragma once

// What-if tools: one-parameter sensitivity sweeps and side-by-side scenario
// comparison with a one-at-a-time attribution of the welfare gap.

#include "sovai/scenario.hpp"
#include "sovai/solver.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sovai {

/// Sweepable paths: alpha, lambda, g, k, p, theta, budget,
/// pillars.<data|compute|model|norms>.a and pillars.<...>.w_raw.
const std::vector<std::string>& parameterPaths();

/// Current value of a parameter; throws DomainError for an unknown path.
double parameterValue(const EconomyModel& model, std::string_view path);

/// Copy of `model` with one parameter replaced. Throws DomainError for an
/// unknown path or a value outside the parameter's domain.
EconomyModel withParameter(const EconomyModel& model, std::string_view path, double value);

struct SweepRow {
  double value = 0.0;
  std::optional<PlannerSolution> solution;
  std::string error;  ///< solver failure message; empty on success
};

struct SweepTable {
  std::string parameter;
  std::vector<SweepRow> rows;
};

/// Re-solves (solveJoint) the scenario's model for each value. Unknown paths
/// and out-of-domain values are rejected up front with a ValidationError;
/// solver failures are recorded in their row and the sweep continues.
SweepTable sensitivity(const Scenario& scenario, std::string_view parameter,
                       const std::vector<double>& values, const SolveOptions& opts);

inline constexpr const char* kSweepCsvHeader =
    "value,x_data,x_compute,x_model,x_norms,openness,multiplier,S,W,error";

std::string sensitivityCsv(const SweepTable& table);

struct ParameterDelta {
  std::string path;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  ///< b - a
};

/// Welfare change from moving one parameter group of `a` to its value in `b`.
struct Driver {
  std::string parameter;  ///< a parameter path, or "weights" for the raw weight vector
  double welfareEffect = 0.0;
  std::string error;
};

struct ComparisonReport {
  std::string idA;
  std::string idB;
  PlannerSolution a;
  PlannerSolution b;
  std::vector<ParameterDelta> deltas;  ///< every parameter, in parameterPaths() order
  double welfareGap = 0.0;             ///< W_b - W_a
  std::vector<Driver> drivers;         ///< differing parameters, largest |effect| first
};

ComparisonReport compareScenarios(const Scenario& a, const Scenario& b, const SolveOptions& opts);

}  // namespace sovai
