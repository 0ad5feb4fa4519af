#include "sovai/analysis.hpp"

#include <algorithm>
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

// "pillars.<key>.<field>" -> (pillar, field)
std::optional<std::pair<PillarId, std::string>> pillarPath(std::string_view path) {
  constexpr std::string_view prefix = "pillars.";
  if (path.substr(0, prefix.size()) != prefix) return std::nullopt;
  path.remove_prefix(prefix.size());
  const auto dot = path.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  auto id = parsePillar(path.substr(0, dot));
  std::string field(path.substr(dot + 1));
  if (!id || (field != "a" && field != "w_raw")) return std::nullopt;
  return std::make_pair(*id, field);
}

std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

const std::vector<std::string>& parameterPaths() {
  static const std::vector<std::string> paths = [] {
    std::vector<std::string> p = {"alpha", "lambda", "g", "k", "p", "theta", "budget"};
    for (PillarId id : kAllPillars) p.push_back("pillars." + std::string(pillarKey(id)) + ".a");
    for (PillarId id : kAllPillars) p.push_back("pillars." + std::string(pillarKey(id)) + ".w_raw");
    return p;
  }();
  return paths;
}

double parameterValue(const EconomyModel& model, std::string_view path) {
  const auto& o = model.openness();
  if (path == "alpha") return o.sovereigntyWeight;
  if (path == "lambda") return o.riskSensitivity;
  if (path == "g") return o.benefitScale;
  if (path == "k") return o.benefitCurvature;
  if (path == "p") return o.exposureSlope;
  if (path == "theta") return model.theta();
  if (path == "budget") return model.budget();
  if (auto pp = pillarPath(path)) {
    return pp->second == "a" ? model.productivity(pp->first) : model.rawWeight(pp->first);
  }
  throw DomainError("unknown parameter path '" + std::string(path) + "'");
}

EconomyModel withParameter(const EconomyModel& model, std::string_view path, double value) {
  if (!std::isfinite(value)) throw DomainError("parameter value must be finite");
  OpennessParams o = model.openness();
  if (path == "alpha") {
    o.sovereigntyWeight = value;
  } else if (path == "lambda") {
    o.riskSensitivity = value;
  } else if (path == "g") {
    o.benefitScale = value;
  } else if (path == "k") {
    o.benefitCurvature = value;
  } else if (path == "p") {
    o.exposureSlope = value;
  } else if (path == "theta") {
    return model.withTheta(value);
  } else if (path == "budget") {
    return model.withBudget(value);
  } else if (auto pp = pillarPath(path)) {
    PillarParams raw = model.rawPillars()[pp->first];
    (pp->second == "a" ? raw.productivity : raw.weight) = value;
    return model.withPillar(pp->first, raw);
  } else {
    throw DomainError("unknown parameter path '" + std::string(path) + "'");
  }
  return model.withOpenness(o);
}

SweepTable sensitivity(const Scenario& scenario, std::string_view parameter,
                       const std::vector<double>& values, const SolveOptions& opts) {
  std::vector<ValidationIssue> issues;
  const auto& paths = parameterPaths();
  if (std::find(paths.begin(), paths.end(), parameter) == paths.end()) {
    throw ValidationError("parameter", "unknown parameter path '" + std::string(parameter) + "'");
  }
  if (values.empty()) issues.push_back({"values", "at least one value is required"});
  std::vector<EconomyModel> models;
  models.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      models.push_back(withParameter(scenario.model, parameter, values[i]));
    } catch (const DomainError& e) {
      issues.push_back({"values[" + std::to_string(i) + "]", e.what()});
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  SweepTable table{std::string(parameter), {}};
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row{values[i], std::nullopt, ""};
    try {
      row.solution = solveJoint(models[i], opts);
    } catch (const SolverFailure& e) {
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string sensitivityCsv(const SweepTable& table) {
  std::ostringstream out;
  out << kSweepCsvHeader << "\n";
  for (const auto& row : table.rows) {
    out << num(row.value);
    if (row.solution) {
      const auto& s = *row.solution;
      for (PillarId id : kAllPillars) out << "," << num(s.allocation[id]);
      out << "," << num(s.openness) << "," << num(s.multiplier) << "," << num(s.welfare.S) << ","
          << num(s.welfare.W) << ",";
    } else {
      out << ",,,,,,,,," << csvField(row.error);
    }
    out << "\n";
  }
  return out.str();
}

ComparisonReport compareScenarios(const Scenario& a, const Scenario& b, const SolveOptions& opts) {
  ComparisonReport r;
  r.idA = a.id;
  r.idB = b.id;
  r.a = solveJoint(a.model, opts);
  r.b = solveJoint(b.model, opts);
  r.welfareGap = r.b.welfare.W - r.a.welfare.W;

  bool weightsDiffer = false;
  std::vector<std::string> changed;
  for (const auto& path : parameterPaths()) {
    const double va = parameterValue(a.model, path);
    const double vb = parameterValue(b.model, path);
    r.deltas.push_back({path, va, vb, vb - va});
    if (va == vb) continue;
    if (path.size() > 6 && path.compare(path.size() - 6, 6, ".w_raw") == 0) {
      weightsDiffer = true;
    } else {
      changed.push_back(path);
    }
  }
  // Raw weights enter only through their normalization, so they move together.
  if (weightsDiffer) changed.push_back("weights");

  for (const auto& path : changed) {
    Driver d{path, 0.0, ""};
    try {
      const EconomyModel m = path == "weights"
                                 ? a.model.withRawWeights(b.model.rawWeights())
                                 : withParameter(a.model, path, parameterValue(b.model, path));
      d.welfareEffect = solveJoint(m, opts).welfare.W - r.a.welfare.W;
    } catch (const SolverFailure& e) {
      d.error = e.what();
    }
    r.drivers.push_back(std::move(d));
  }
  std::stable_sort(r.drivers.begin(), r.drivers.end(), [](const Driver& x, const Driver& y) {
    return std::fabs(x.welfareEffect) > std::fabs(y.welfareEffect);
  });
  return r;
}

}  // namespace sovai
