#pragma once

// Budget allocation and openness for the planner's problem
//
//   max  alpha S(x) + (1 - alpha) G(O) - lambda P(O)
//   s.t. x_D + x_C + x_M + x_N <= B,  x >= 0,  0 <= O <= 1.
//
// The objective is additively separable in x and O, so the two parts are
// solved independently: openness in closed form, the allocation by
//
//   1. bisection on the budget multiplier mu, inverting each pillar's
//      first-order condition at the trial price (Data/Compute jointly, by
//      best-response iteration, since theta D C couples them);
//   2. multi-start projected-gradient ascent on the budget simplex, because
//      theta D C makes S non-concave in general;
//   3. an active-set Newton polish of every candidate onto its KKT point,
//      including the surface where model autonomy just saturates;
//   4. comparison with an exhaustive grid search when it is small enough.
//
// All functions are pure; separate solves can run concurrently.

#include "sovai/model.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sovai {

struct SolveOptions {
  double tolerance = 1e-8;   ///< KKT residual and stopping tolerance
  int maxIterations = 10000; ///< per local search
  int multistartCount = 16;  ///< random restarts of projected-gradient ascent
  std::uint64_t randomSeed = 42;
  int oracleResolution = 60; ///< grid points per axis for the globality check

  /// Throws DomainError unless every field is positive and tolerance < 1.
  void validate() const;

  friend bool operator==(const SolveOptions&, const SolveOptions&) = default;
};

struct KktResiduals {
  /// Funded: alpha dS/dx_i - mu. Unfunded: max(0, alpha dS/dx_i - mu).
  PillarMap<double> pillars{};
  /// 0 at a bound, otherwise (1-alpha) g k / (1 + k O) - lambda p.
  double openness = 0.0;
  /// mu (B - sum x).
  double complementarySlackness = 0.0;

  /// Largest absolute entry.
  double maxAbs() const;

  friend bool operator==(const KktResiduals&, const KktResiduals&) = default;
};

struct SolutionFlags {
  bool budgetBinding = false;
  bool mClipped = false;
  bool opennessAtBound = false;
  bool globalityVerified = false;

  friend bool operator==(const SolutionFlags&, const SolutionFlags&) = default;
};

struct PlannerSolution {
  Allocation allocation;
  double openness = 0.0;
  double multiplier = 0.0;  ///< mu*, in welfare units per budget unit
  CapacityVector capacities;
  WelfareBreakdown welfare;
  std::vector<PillarId> fundedSet;
  KktResiduals kktResiduals;
  SolutionFlags flags;

  friend bool operator==(const PlannerSolution&, const PlannerSolution&) = default;
};

struct OracleSolution {
  Allocation allocation;
  double openness = 0.0;
  WelfareBreakdown welfare;
  int gridResolution = 0;
};

struct OpennessChoice {
  double O = 0.0;
  bool atBound = false;
};

enum class Verdict { Fund, Defer };

std::string_view verdictName(Verdict v);

struct GateResult {
  Allocation allocation;
  double impliedBudget = 0.0;
  PillarMap<Verdict> verdicts{};
  bool allDeferred = false;
};

/// Raised when no candidate satisfies the optimality conditions.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, PlannerSolution best)
      : std::runtime_error(what), best_(std::move(best)) {}

  /// Best feasible iterate found, with its residuals.
  const PlannerSolution& bestIterate() const { return best_; }

 private:
  PlannerSolution best_;
};

/// Clamped closed form max{0, min[1, (1-alpha) g / (lambda p) - 1/k]}.
/// With lambda p = 0 the benefit is unopposed: O* = 1 if alpha < 1, else 0.
OpennessChoice optimalOpenness(const OpennessParams& params);

/// Maximizes alpha S(x) on the budget set. Openness is left at 0 and the
/// welfare breakdown is evaluated there; see solveJoint.
PlannerSolution solveAllocation(const EconomyModel& model, const SolveOptions& opts = {});

/// solveAllocation combined with optimalOpenness.
PlannerSolution solveJoint(const EconomyModel& model, const SolveOptions& opts = {});

/// Exhaustive search over {x : x_i = B j_i / R, sum j_i <= R} x {O = j / R}.
/// Ties resolve to the first point in lexicographic (Data, Compute, Model,
/// Norms, O) order. Rejects resolution < 2 or more than 10^8 evaluations.
OracleSolution gridOracle(const EconomyModel& model, int resolution);

/// Number of allocation points on the simplex grid of the given resolution.
std::uint64_t simplexGridSize(int resolution);

/// Residual report for an arbitrary (allocation, openness, multiplier).
KktResiduals kktResiduals(const EconomyModel& model, const PlannerSolution& sol);

/// mu*(B) for each budget; budgets must be positive and ascending.
std::vector<double> shadowPrice(const EconomyModel& model, const std::vector<double>& budgets,
                                const SolveOptions& opts = {});

/// Spending that is optimal at an exogenous price of funds: maximizes
/// alpha S(x) - mu sum x over x >= 0. A pillar is deferred (x_i = 0) when its
/// slope at zero does not clear mu / alpha.
GateResult gateModeAllocation(const EconomyModel& model, double mu, const SolveOptions& opts = {});

}  // namespace sovai
