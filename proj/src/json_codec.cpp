#include "sovai/json_codec.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace sovai {

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // drop the sign of -0
}

std::string dumpJson(const Json& value) { return value.dump(2) + "\n"; }

namespace {

Json n(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round12(x);
}

Json n(const std::optional<double>& x) { return x ? n(*x) : Json(nullptr); }

template <typename F>
Json perPillar(F&& f) {
  Json out = Json::object();
  for (PillarId id : kAllPillars) out[std::string(pillarKey(id))] = f(id);
  return out;
}

std::string key(PillarId id) { return std::string(pillarKey(id)); }

}  // namespace

Json toJson(const Allocation& a) {
  return perPillar([&](PillarId id) { return n(a[id]); });
}

Json toJson(const CapacityVector& c) {
  Json out = perPillar([&](PillarId id) { return n(c[id]); });
  out["mClipped"] = c.mClipped;
  return out;
}

Json toJson(const WelfareBreakdown& w) {
  return Json{{"S", n(w.S)}, {"G", n(w.G)}, {"P", n(w.P)}, {"W", n(w.W)}};
}

Json toJson(const KktResiduals& k) {
  return Json{{"pillars", perPillar([&](PillarId id) { return n(k.pillars[id]); })},
              {"openness", n(k.openness)},
              {"complementarySlackness", n(k.complementarySlackness)},
              {"maxAbs", n(k.maxAbs())}};
}

Json toJson(const SolutionFlags& f) {
  return Json{{"budgetBinding", f.budgetBinding},
              {"mClipped", f.mClipped},
              {"opennessAtBound", f.opennessAtBound},
              {"globalityVerified", f.globalityVerified}};
}

Json toJson(const PlannerSolution& s) {
  Json funded = Json::array();
  for (PillarId id : s.fundedSet) funded.push_back(key(id));
  return Json{{"allocation", toJson(s.allocation)},
              {"openness", n(s.openness)},
              {"multiplier", n(s.multiplier)},
              {"capacities", toJson(s.capacities)},
              {"welfare", toJson(s.welfare)},
              {"fundedSet", funded},
              {"kktResiduals", toJson(s.kktResiduals)},
              {"flags", toJson(s.flags)}};
}

Json toJson(const OracleSolution& s) {
  return Json{{"allocation", toJson(s.allocation)},
              {"openness", n(s.openness)},
              {"welfare", toJson(s.welfare)},
              {"gridResolution", s.gridResolution}};
}

Json toJson(const OpennessChoice& o) { return Json{{"O", n(o.O)}, {"atBound", o.atBound}}; }

Json toJson(const GateResult& g, double mu, double alpha) {
  return Json{{"mu", n(mu)},
              {"alpha", n(alpha)},
              {"bar", alpha > 0.0 ? n(mu / alpha) : Json(nullptr)},
              {"allocation", toJson(g.allocation)},
              {"impliedBudget", n(g.impliedBudget)},
              {"verdicts", perPillar([&](PillarId id) { return std::string(verdictName(g.verdicts[id])); })},
              {"allDeferred", g.allDeferred}};
}

Json toJson(const WeightResult& w) {
  Json weights = Json::array();
  for (double v : w.weights) weights.push_back(n(v));
  Json out = Json::object();
  if (w.weights.size() == kPillarCount) {
    out["weights"] = perPillar([&](PillarId id) { return n(w.weights[index(id)]); });
  } else {
    out["weights"] = weights;
  }
  out["principalEigenvalue"] = n(w.principalEigenvalue);
  out["consistencyRatio"] = n(w.consistencyRatio);
  out["consistent"] = w.consistent;
  out["iterations"] = w.iterations;
  return out;
}

Json toJson(const std::vector<ChecklistDecision>& decisions) {
  Json out = Json::array();
  for (const auto& d : decisions) {
    out.push_back(Json{{"name", d.name}, {"approved", d.approved}, {"margin", n(d.margin)}});
  }
  return out;
}

Json toJson(const GuardrailResult& g) {
  return Json{{"metricId", g.target.metricId},
              {"comparator", std::string(comparatorSymbol(g.target.comparator))},
              {"target", n(g.target.threshold)},
              {"unit", std::string(metricUnitName(g.target.unit))},
              {"observed", n(g.observed)},
              {"period", g.observed ? Json(g.period) : Json(nullptr)},
              {"status", std::string(guardrailStatusName(g.status))},
              {"pass", g.pass()}};
}

Json toJson(const DashboardReport& r) {
  Json out = Json::object();
  out["scenarioId"] = r.scenarioId;
  out["period"] = r.period;
  out["mode"] = r.mode == MuMode::Kind::Exogenous ? "exogenous" : "endogenous";
  out["mu"] = n(r.mu);
  out["alpha"] = n(r.alpha);
  out["bar"] = n(r.bar);
  out["budget"] = n(r.budget);
  out["mClipped"] = r.mClipped;
  out["verdictTolerance"] = r.verdictTolerance;
  if (r.perPillar) {
    out["perPillar"] = perPillar([&](PillarId id) {
      const PillarRow& row = (*r.perPillar)[id];
      return Json{{"marginalReturn", n(row.marginalReturn)},
                  {"bar", n(r.bar)},
                  {"verdict", std::string(verdictName(row.verdict))},
                  {"allocation", n(row.allocation)},
                  {"capacity", n(row.capacity)}};
    });
  } else {
    out["perPillar"] = nullptr;
  }
  out["openness"] = Json{{"O", n(r.openness.O)},
                         {"atBound", r.openness.atBound},
                         {"benefit", n(r.openness.benefit)},
                         {"exposure", n(r.openness.exposure)}};
  out["checklistDecisions"] = toJson(r.checklistDecisions);
  Json guardrails = Json::array();
  for (const auto& g : r.guardrailResults) guardrails.push_back(toJson(g));
  out["guardrailResults"] = guardrails;
  out["welfare"] = r.welfare ? toJson(*r.welfare) : Json(nullptr);
  out["solverFailure"] = r.solverFailure ? Json(*r.solverFailure) : Json(nullptr);
  return out;
}

Json toJson(const SweepTable& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json j{{"value", n(row.value)}};
    if (row.solution) {
      j["allocation"] = toJson(row.solution->allocation);
      j["openness"] = n(row.solution->openness);
      j["multiplier"] = n(row.solution->multiplier);
      j["S"] = n(row.solution->welfare.S);
      j["W"] = n(row.solution->welfare.W);
      j["error"] = nullptr;
    } else {
      j["allocation"] = nullptr;
      j["openness"] = nullptr;
      j["multiplier"] = nullptr;
      j["S"] = nullptr;
      j["W"] = nullptr;
      j["error"] = row.error;
    }
    rows.push_back(j);
  }
  return Json{{"parameter", t.parameter}, {"rows", rows}};
}

Json toJson(const ComparisonReport& r) {
  Json deltas = Json::array();
  for (const auto& d : r.deltas) {
    deltas.push_back(Json{{"path", d.path}, {"a", n(d.a)}, {"b", n(d.b)}, {"delta", n(d.delta)}});
  }
  Json drivers = Json::array();
  for (const auto& d : r.drivers) {
    drivers.push_back(Json{{"parameter", d.parameter},
                           {"welfareEffect", n(d.welfareEffect)},
                           {"error", d.error.empty() ? Json(nullptr) : Json(d.error)}});
  }
  Json allocDelta = perPillar([&](PillarId id) { return n(r.b.allocation[id] - r.a.allocation[id]); });
  return Json{{"a", {{"id", r.idA}, {"solution", toJson(r.a)}}},
              {"b", {{"id", r.idB}, {"solution", toJson(r.b)}}},
              {"deltas", deltas},
              {"solutionDeltas",
               {{"allocation", allocDelta},
                {"openness", n(r.b.openness - r.a.openness)},
                {"multiplier", n(r.b.multiplier - r.a.multiplier)},
                {"S", n(r.b.welfare.S - r.a.welfare.S)},
                {"W", n(r.welfareGap)}}},
              {"welfareGap", n(r.welfareGap)},
              {"drivers", drivers}};
}

SolveOptions solveOptionsFromJson(const Json* options, const SolveOptions& defaults,
                                  std::vector<ValidationIssue>& issues) {
  SolveOptions o = defaults;
  if (options == nullptr || options->is_null()) return o;
  if (!options->is_object()) {
    issues.push_back({"options", "must be an object"});
    return o;
  }
  auto positiveInt = [&](const char* name, int& field) {
    auto it = options->find(name);
    if (it == options->end()) return;
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1 ||
        it->get<std::int64_t>() > 1'000'000'000) {
      issues.push_back({std::string("options.") + name, "must be a positive integer"});
      return;
    }
    field = static_cast<int>(it->get<std::int64_t>());
  };
  for (auto it = options->begin(); it != options->end(); ++it) {
    const std::string& k = it.key();
    if (k != "tolerance" && k != "maxIterations" && k != "multistartCount" && k != "randomSeed" &&
        k != "oracleResolution") {
      issues.push_back({"options." + k, "unknown field"});
    }
  }
  if (auto it = options->find("tolerance"); it != options->end()) {
    if (!it->is_number() || !(it->get<double>() > 0.0 && it->get<double>() < 1.0)) {
      issues.push_back({"options.tolerance", "must be a number in (0, 1)"});
    } else {
      o.tolerance = it->get<double>();
    }
  }
  positiveInt("maxIterations", o.maxIterations);
  positiveInt("multistartCount", o.multistartCount);
  positiveInt("oracleResolution", o.oracleResolution);
  if (auto it = options->find("randomSeed"); it != options->end()) {
    if (it->is_number_unsigned()) {
      o.randomSeed = it->get<std::uint64_t>();
    } else {
      issues.push_back({"options.randomSeed", "must be a non-negative integer"});
    }
  }
  return o;
}

OpennessParams opennessFromJson(const Json& body) {
  // Reuse the scenario-document rules for the openness block.
  Json doc = Json::object();
  doc["pillars"] = Json::object();
  for (PillarId id : kAllPillars) doc["pillars"][key(id)] = Json{{"a", 1.0}, {"w_raw", 1.0}};
  doc["theta"] = 0.0;
  doc["openness"] = body;
  doc["budget"] = 1.0;
  std::vector<ValidationIssue> issues;
  auto model = loadModel(doc, issues);
  if (!model) {
    for (auto& i : issues) {
      if (i.path.rfind("openness.", 0) == 0) i.path.erase(0, 9);
      else if (i.path == "openness") i.path = "$";
    }
    throw ValidationError(std::move(issues));
  }
  return model->openness();
}

PairwiseMatrix matrixFromJson(const Json& body) {
  const Json* m = &body;
  if (body.is_object()) {
    auto it = body.find("matrix");
    if (it == body.end()) throw ValidationError("matrix", "required");
    m = &*it;
  }
  if (!m->is_array() || m->empty()) {
    throw ValidationError("matrix", "must be a non-empty array of rows");
  }
  std::vector<ValidationIssue> issues;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < m->size(); ++i) {
    const Json& row = (*m)[i];
    const std::string path = "matrix[" + std::to_string(i) + "]";
    if (!row.is_array()) {
      issues.push_back({path, "must be an array"});
      continue;
    }
    std::vector<double> r;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j].is_number()) {
        issues.push_back({path + "[" + std::to_string(j) + "]", "must be a number"});
        r.push_back(0.0);
      } else {
        r.push_back(row[j].get<double>());
      }
    }
    rows.push_back(std::move(r));
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  try {
    return PairwiseMatrix(std::move(rows));
  } catch (const DomainError& e) {
    throw ValidationError("matrix", e.what());
  }
}

PairwiseMatrix matrixFromText(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::vector<ValidationIssue> issues;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> row;
    while (ls >> tok) {
      const std::string path =
          "matrix[" + std::to_string(rows.size()) + "][" + std::to_string(row.size()) + "]";
      const auto slash = tok.find('/');
      char* end = nullptr;
      double v = 0.0;
      bool ok = false;
      if (slash == std::string::npos) {
        v = std::strtod(tok.c_str(), &end);
        ok = end == tok.c_str() + tok.size();
      } else {
        const std::string num = tok.substr(0, slash);
        const std::string den = tok.substr(slash + 1);
        char* e1 = nullptr;
        char* e2 = nullptr;
        const double a = std::strtod(num.c_str(), &e1);
        const double b = std::strtod(den.c_str(), &e2);
        ok = !num.empty() && !den.empty() && e1 == num.c_str() + num.size() &&
             e2 == den.c_str() + den.size() && b != 0.0;
        v = ok ? a / b : 0.0;
      }
      if (!ok) issues.push_back({path, "not a number or fraction: '" + tok + "'"});
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) issues.push_back({"matrix", "no rows found"});
  if (!issues.empty()) throw ValidationError(std::move(issues));
  try {
    return PairwiseMatrix(std::move(rows));
  } catch (const DomainError& e) {
    throw ValidationError("matrix", e.what());
  }
}

}  // namespace sovai
