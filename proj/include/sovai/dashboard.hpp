#pragma once

// Quarterly marginal-returns dashboard: per-pillar marginal sovereignty
// return against the mu / alpha bar, the openness choice, checklist
// decisions and guardrail results for one reporting period.

#include "sovai/scenario.hpp"
#include "sovai/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sovai {

/// Relative slack in the fund test: fund <=> marginalReturn >= bar * (1 - tol).
/// Funded pillars sit exactly on the bar, so the exact comparison would flip
/// on the last bit of rounding.
inline constexpr double kVerdictTolerance = 1e-9;

struct PillarRow {
  double marginalReturn = 0.0;  ///< dS/dx_i at the reported allocation
  double allocation = 0.0;
  double capacity = 0.0;
  Verdict verdict = Verdict::Defer;
};

struct OpennessBlock {
  double O = 0.0;
  bool atBound = false;
  double benefit = 0.0;   ///< G(O)
  double exposure = 0.0;  ///< lambda * P(O)
};

struct DashboardReport {
  std::string scenarioId;
  std::string period;
  MuMode::Kind mode = MuMode::Kind::Endogenous;
  double mu = 0.0;  ///< exogenous price, or the solved multiplier
  double alpha = 0.0;
  std::optional<double> bar;  ///< mu / alpha; empty when alpha = 0 (nothing clears)
  double budget = 0.0;        ///< B, or the budget implied by an exogenous mu
  bool mClipped = false;
  double verdictTolerance = kVerdictTolerance;
  /// Empty when the solver failed; the other sections are still filled.
  std::optional<PillarMap<PillarRow>> perPillar;
  OpennessBlock openness;
  std::optional<WelfareBreakdown> welfare;
  std::vector<ChecklistDecision> checklistDecisions;
  std::vector<GuardrailResult> guardrailResults;
  std::optional<std::string> solverFailure;
};

/// fund <=> bar defined and marginalReturn >= bar * (1 - kVerdictTolerance).
Verdict verdictFor(double marginalReturn, std::optional<double> bar);

/// Endogenous scenarios are solved on their budget; exogenous ones are gated
/// at their mu. Solver failures are captured in the report, not thrown.
DashboardReport marginalReturnsDashboard(const Scenario& scenario,
                                         const std::vector<MetricObservation>& observations,
                                         const SolveOptions& opts, const std::string& period);

/// Header of the delimited export, one row per pillar follows.
inline constexpr const char* kDashboardCsvHeader =
    "period,pillar,allocation,capacity,marginal_return,bar,verdict";

std::string dashboardCsv(const DashboardReport& report);

/// Fixed-width table for terminals.
std::string dashboardTable(const DashboardReport& report);

}  // namespace sovai
