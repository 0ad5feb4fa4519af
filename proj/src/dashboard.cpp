#include "sovai/dashboard.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace sovai {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fixed(double v, int width, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*f", width, prec, v);
  return buf;
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

}  // namespace

Verdict verdictFor(double marginalReturn, std::optional<double> bar) {
  if (!bar) return Verdict::Defer;
  return marginalReturn >= *bar * (1.0 - kVerdictTolerance) ? Verdict::Fund : Verdict::Defer;
}

DashboardReport marginalReturnsDashboard(const Scenario& scenario,
                                         const std::vector<MetricObservation>& observations,
                                         const SolveOptions& opts, const std::string& period) {
  const EconomyModel& model = scenario.model;
  DashboardReport r;
  r.scenarioId = scenario.id;
  r.period = period;
  r.mode = scenario.muMode.kind;
  r.alpha = model.alpha();
  r.checklistDecisions = evaluateChecklist(scenario.checklist);
  r.guardrailResults = evaluateGuardrails(scenario.guardrails, observations);

  const OpennessChoice open = optimalOpenness(model.openness());
  const auto& op = model.openness();
  r.openness = {open.O, open.atBound, opennessBenefit(op.benefitScale, op.benefitCurvature, open.O),
                op.riskSensitivity * exposureCost(op.exposureSlope, open.O)};

  Allocation alloc;
  try {
    if (scenario.muMode.isExogenous()) {
      r.mu = scenario.muMode.mu;
      const GateResult gate = gateModeAllocation(model, r.mu, opts);
      alloc = gate.allocation;
      r.budget = gate.impliedBudget;
    } else {
      const PlannerSolution sol = solveJoint(model, opts);
      alloc = sol.allocation;
      r.mu = sol.multiplier;
      r.budget = model.budget();
    }
  } catch (const SolverFailure& e) {
    r.mu = scenario.muMode.isExogenous() ? scenario.muMode.mu : e.bestIterate().multiplier;
    r.budget = scenario.muMode.isExogenous() ? 0.0 : model.budget();
    r.solverFailure = e.what();
  }
  if (r.alpha > 0.0) r.bar = r.mu / r.alpha;
  if (r.solverFailure) return r;

  const CapacityVector caps = capacities(model, alloc);
  const MarginalReturns mr = marginalReturns(model, alloc);
  r.mClipped = caps.mClipped;
  PillarMap<PillarRow> rows{};
  for (PillarId id : kAllPillars) {
    rows[id] = {mr[id], alloc[id], caps[id], verdictFor(mr[id], r.bar)};
  }
  r.perPillar = rows;
  r.welfare = welfare(model, alloc, open.O);
  return r;
}

std::string dashboardCsv(const DashboardReport& report) {
  std::ostringstream out;
  out << kDashboardCsvHeader << "\n";
  if (!report.perPillar) return out.str();
  for (PillarId id : kAllPillars) {
    const PillarRow& row = (*report.perPillar)[id];
    out << report.period << "," << pillarKey(id) << "," << num(row.allocation) << ","
        << num(row.capacity) << "," << num(row.marginalReturn) << ","
        << (report.bar ? num(*report.bar) : "") << "," << verdictName(row.verdict) << "\n";
  }
  return out.str();
}

std::string dashboardTable(const DashboardReport& report) {
  std::ostringstream out;
  out << "Scenario " << report.scenarioId;
  if (!report.period.empty()) out << "  period " << report.period;
  out << "\n";
  out << (report.mode == MuMode::Kind::Exogenous ? "exogenous mu " : "solved mu ")
      << num(report.mu) << "  alpha " << num(report.alpha) << "  bar mu/alpha "
      << (report.bar ? num(*report.bar) : "undefined (alpha = 0)") << "\n";
  out << "budget " << num(report.budget);
  if (report.mClipped) out << "  (model autonomy saturated)";
  out << "\n\n";

  if (report.perPillar) {
    out << pad("pillar", 9) << pad("  allocation", 13) << pad("  capacity", 11)
        << pad("  marg.return", 14) << "  verdict\n";
    for (PillarId id : kAllPillars) {
      const PillarRow& row = (*report.perPillar)[id];
      out << pad(pillarName(id), 9) << fixed(row.allocation, 13, 6) << fixed(row.capacity, 11, 6)
          << fixed(row.marginalReturn, 14, 6) << "  " << verdictName(row.verdict) << "\n";
    }
  } else {
    out << "solver failure: " << report.solverFailure.value_or("") << "\n";
  }

  out << "\nopenness O* " << fixed(report.openness.O, 0, 6)
      << (report.openness.atBound ? " (at bound)" : "") << "  G " << fixed(report.openness.benefit, 0, 6)
      << "  lambda*P " << fixed(report.openness.exposure, 0, 6) << "\n";
  if (report.welfare) {
    out << "welfare S " << fixed(report.welfare->S, 0, 6) << "  W " << fixed(report.welfare->W, 0, 6)
        << "\n";
  }

  if (!report.checklistDecisions.empty()) {
    out << "\nchecklist\n";
    for (const auto& d : report.checklistDecisions) {
      out << "  " << (d.approved ? "approve " : "reject  ") << fixed(d.margin, 7, 2) << "  " << d.name
          << "\n";
    }
  }
  if (!report.guardrailResults.empty()) {
    out << "\nguardrails\n";
    for (const auto& g : report.guardrailResults) {
      out << "  " << pad(guardrailStatusName(g.status), 8) << pad(g.target.metricId, 40) << " "
          << comparatorSymbol(g.target.comparator) << " " << num(g.target.threshold);
      if (g.observed) out << "  observed " << num(*g.observed) << " (" << g.period << ")";
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace sovai
