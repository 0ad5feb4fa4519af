#include "sovai/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace sovai {

namespace {

std::string join(const std::string& prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

std::string indexed(const std::string& prefix, std::size_t i) {
  return prefix + "[" + std::to_string(i) + "]";
}

std::string shortNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

bool isSlug(const std::string& s) {
  if (s.empty() || s.size() > 64) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool alnum = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (!alnum && (i == 0 || (c != '-' && c != '_'))) return false;
  }
  return true;
}

// Collects issues instead of throwing so that one pass reports everything.
class Reader {
 public:
  explicit Reader(std::vector<ValidationIssue>& issues) : issues_(issues) {}

  void fail(std::string path, std::string reason) {
    issues_.push_back({std::move(path), std::move(reason)});
  }

  std::size_t count() const { return issues_.size(); }

  const Json* object(const Json& parent, std::string_view key, const std::string& path,
                     bool required) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) fail(path, "required");
      return nullptr;
    }
    if (!it->is_object()) {
      fail(path, "must be an object");
      return nullptr;
    }
    return &*it;
  }

  const Json* array(const Json& parent, std::string_view key, const std::string& path) {
    auto it = parent.find(key);
    if (it == parent.end()) return nullptr;
    if (!it->is_array()) {
      fail(path, "must be an array");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const Json& parent, std::string_view key, const std::string& path,
                               const std::function<bool(double)>& ok, std::string_view rule,
                               bool required = true) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) fail(path, "required");
      return std::nullopt;
    }
    if (!it->is_number()) {
      fail(path, "must be a number");
      return std::nullopt;
    }
    const double v = it->get<double>();
    if (!std::isfinite(v) || !ok(v)) {
      fail(path, std::string(rule) + " (got " + shortNumber(v) + ")");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::string> string(const Json& parent, std::string_view key,
                                    const std::string& path, bool required) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) fail(path, "required");
      return std::nullopt;
    }
    if (!it->is_string()) {
      fail(path, "must be a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  void rejectUnknown(const Json& obj, std::initializer_list<std::string_view> known,
                     const std::string& prefix) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool found = false;
      for (auto k : known) found = found || it.key() == k;
      if (!found) fail(join(prefix, it.key()), "unknown field");
    }
  }

  std::optional<Provenance> provenance(const Json& value, const std::string& path) {
    if (!value.is_object()) {
      fail(path, "must be an object { source, note }");
      return std::nullopt;
    }
    rejectUnknown(value, {"source", "note"}, path);
    Provenance p;
    bool good = true;
    if (auto src = string(value, "source", join(path, "source"), true)) {
      if (auto parsed = parseProvenanceSource(*src)) {
        p.source = *parsed;
      } else {
        fail(join(path, "source"), "must be one of paper, illustrative, user, derived");
        good = false;
      }
    } else {
      good = false;
    }
    if (auto note = string(value, "note", join(path, "note"), false)) p.note = *note;
    if (!good) return std::nullopt;
    return p;
  }

 private:
  std::vector<ValidationIssue>& issues_;
};

auto positive = [](double v) { return v > 0.0; };
auto nonNegative = [](double v) { return v >= 0.0; };
auto anyValue = [](double) { return true; };

Json provenanceJson(const Provenance& p) {
  return Json{{"source", std::string(provenanceSourceName(p.source))}, {"note", p.note}};
}

std::string pillarFieldPath(PillarId id, std::string_view field) {
  return "pillars." + std::string(pillarKey(id)) + "." + std::string(field);
}

}  // namespace

std::optional<EconomyModel> loadModel(const Json& document, std::vector<ValidationIssue>& issues,
                                      const std::string& prefix) {
  Reader r(issues);
  const std::size_t before = r.count();
  if (!document.is_object()) {
    r.fail(prefix.empty() ? "$" : prefix, "must be an object");
    return std::nullopt;
  }

  PillarMap<PillarParams> pillars{};
  const std::string pillarsPath = join(prefix, "pillars");
  if (const Json* ps = r.object(document, "pillars", pillarsPath, true)) {
    r.rejectUnknown(*ps, {"data", "compute", "model", "norms"}, pillarsPath);
    for (PillarId id : kAllPillars) {
      const std::string path = join(pillarsPath, pillarKey(id));
      const Json* p = r.object(*ps, pillarKey(id), path, true);
      if (p == nullptr) continue;
      r.rejectUnknown(*p, {"a", "w_raw", "provenance"}, path);
      if (auto a = r.number(*p, "a", join(path, "a"), positive, "must be > 0")) {
        pillars[id].productivity = *a;
      }
      if (auto w = r.number(*p, "w_raw", join(path, "w_raw"), nonNegative, "must be >= 0")) {
        pillars[id].weight = *w;
      }
    }
    if (r.count() == before) {
      double sum = 0.0;
      for (PillarId id : kAllPillars) sum += pillars[id].weight;
      if (!(sum > 0.0)) r.fail(pillarsPath, "at least one w_raw must be > 0");
    }
  }

  double theta = 0.0;
  if (auto t = r.number(document, "theta", join(prefix, "theta"), nonNegative, "must be >= 0")) {
    theta = *t;
  }

  OpennessParams open;
  const std::string openPath = join(prefix, "openness");
  if (const Json* o = r.object(document, "openness", openPath, true)) {
    r.rejectUnknown(*o, {"g", "k", "p", "lambda", "alpha"}, openPath);
    if (auto v = r.number(*o, "g", join(openPath, "g"), positive, "must be > 0")) {
      open.benefitScale = *v;
    }
    if (auto v = r.number(*o, "k", join(openPath, "k"), positive, "must be > 0")) {
      open.benefitCurvature = *v;
    }
    if (auto v = r.number(*o, "p", join(openPath, "p"), nonNegative, "must be >= 0")) {
      open.exposureSlope = *v;
    }
    if (auto v = r.number(*o, "lambda", join(openPath, "lambda"), nonNegative, "must be >= 0")) {
      open.riskSensitivity = *v;
    }
    if (auto v = r.number(
            *o, "alpha", join(openPath, "alpha"), [](double x) { return x >= 0.0 && x <= 1.0; },
            "must be in [0, 1]")) {
      open.sovereigntyWeight = *v;
    }
  }

  double budget = 1.0;
  if (auto b = r.number(document, "budget", join(prefix, "budget"), positive, "must be > 0")) {
    budget = *b;
  }

  if (r.count() != before) return std::nullopt;
  try {
    return EconomyModel(pillars, theta, open, budget);
  } catch (const DomainError& e) {
    r.fail(prefix.empty() ? "$" : prefix, e.what());
    return std::nullopt;
  }
}

Json serializeModel(const EconomyModel& model) {
  Json pillars = Json::object();
  for (PillarId id : kAllPillars) {
    pillars[std::string(pillarKey(id))] =
        Json{{"a", model.productivity(id)}, {"w_raw", model.rawWeight(id)}};
  }
  const auto& o = model.openness();
  return Json{{"pillars", pillars},
              {"theta", model.theta()},
              {"openness",
               {{"g", o.benefitScale},
                {"k", o.benefitCurvature},
                {"p", o.exposureSlope},
                {"lambda", o.riskSensitivity},
                {"alpha", o.sovereigntyWeight}}},
              {"budget", model.budget()}};
}

Scenario loadScenario(const Json& document) {
  std::vector<ValidationIssue> issues;
  Reader r(issues);
  if (!document.is_object()) {
    r.fail("$", "scenario document must be an object");
    throw ValidationError(issues);
  }
  r.rejectUnknown(document,
                  {"id", "name", "description", "version", "pillars", "theta", "openness", "budget",
                   "mu_mode", "checklist", "guardrails", "provenance"},
                  "");

  Scenario s{"", "", "", EconomyModel({}, 0.0, {}, 1.0), {}, {}, {}, {}, 1};

  if (auto id = r.string(document, "id", "id", true)) {
    if (isSlug(*id)) {
      s.id = *id;
    } else {
      r.fail("id", "must be a slug: lower-case letters, digits, '-' or '_', at most 64 chars");
    }
  }
  if (auto name = r.string(document, "name", "name", true)) s.name = *name;
  if (auto d = r.string(document, "description", "description", false)) s.description = *d;

  if (auto it = document.find("version"); it != document.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1 ||
        it->get<std::int64_t>() > std::numeric_limits<int>::max()) {
      r.fail("version", "must be an integer >= 1");
    } else {
      s.version = static_cast<int>(it->get<std::int64_t>());
    }
  }

  auto model = loadModel(document, issues, "");

  if (const Json* mm = r.object(document, "mu_mode", "mu_mode", false)) {
    r.rejectUnknown(*mm, {"mode", "mu"}, "mu_mode");
    if (auto mode = r.string(*mm, "mode", "mu_mode.mode", true)) {
      if (*mode == "endogenous") {
        if (mm->contains("mu")) r.fail("mu_mode.mu", "not allowed when mode is endogenous");
      } else if (*mode == "exogenous") {
        if (auto mu = r.number(*mm, "mu", "mu_mode.mu", positive, "must be > 0")) {
          s.muMode = MuMode::exogenous(*mu);
        }
      } else {
        r.fail("mu_mode.mode", "must be \"endogenous\" or \"exogenous\"");
      }
    }
  }

  if (const Json* cl = r.array(document, "checklist", "checklist")) {
    for (std::size_t i = 0; i < cl->size(); ++i) {
      const std::string path = indexed("checklist", i);
      const Json& item = (*cl)[i];
      if (!item.is_object()) {
        r.fail(path, "must be an object");
        continue;
      }
      r.rejectUnknown(item, {"name", "benefitScore", "exposureScore", "notes"}, path);
      ChecklistIncrement inc;
      if (auto n = r.string(item, "name", path + ".name", true)) inc.name = *n;
      if (auto b = r.number(item, "benefitScore", path + ".benefitScore", nonNegative,
                            "must be finite and >= 0")) {
        inc.benefitScore = *b;
      }
      if (auto e = r.number(item, "exposureScore", path + ".exposureScore", nonNegative,
                            "must be finite and >= 0")) {
        inc.exposureScore = *e;
      }
      if (auto n = r.string(item, "notes", path + ".notes", false)) inc.notes = *n;
      s.checklist.push_back(std::move(inc));
    }
  }

  if (const Json* gs = r.array(document, "guardrails", "guardrails")) {
    for (std::size_t i = 0; i < gs->size(); ++i) {
      const std::string path = indexed("guardrails", i);
      const Json& item = (*gs)[i];
      if (!item.is_object()) {
        r.fail(path, "must be an object");
        continue;
      }
      r.rejectUnknown(item, {"metricId", "comparator", "threshold", "unit"}, path);
      GuardrailTarget t;
      if (auto m = r.string(item, "metricId", path + ".metricId", true)) {
        if (m->empty()) r.fail(path + ".metricId", "must not be empty");
        t.metricId = *m;
      }
      if (auto c = r.string(item, "comparator", path + ".comparator", true)) {
        if (auto parsed = parseComparator(*c)) {
          t.comparator = *parsed;
        } else {
          r.fail(path + ".comparator", "must be one of >, >=, <, <=");
        }
      }
      if (auto th = r.number(item, "threshold", path + ".threshold", anyValue, "must be finite")) {
        t.threshold = *th;
      }
      if (auto u = r.string(item, "unit", path + ".unit", false)) {
        if (auto parsed = parseMetricUnit(*u)) {
          t.unit = *parsed;
        } else {
          r.fail(path + ".unit", "must be one of fraction, count, hours");
        }
      }
      s.guardrails.push_back(std::move(t));
    }
  }

  if (const Json* pv = r.object(document, "provenance", "provenance", false)) {
    for (auto it = pv->begin(); it != pv->end(); ++it) {
      if (auto p = r.provenance(it.value(), "provenance." + it.key())) s.provenance[it.key()] = *p;
    }
  }
  if (auto ps = document.find("pillars"); ps != document.end() && ps->is_object()) {
    for (PillarId id : kAllPillars) {
      auto p = ps->find(pillarKey(id));
      if (p == ps->end() || !p->is_object()) continue;
      const std::string base = join("pillars", pillarKey(id));
      const Json* pv = r.object(*p, "provenance", base + ".provenance", false);
      if (pv == nullptr) continue;
      r.rejectUnknown(*pv, {"a", "w_raw"}, base + ".provenance");
      for (std::string_view field : {"a", "w_raw"}) {
        auto f = pv->find(field);
        if (f == pv->end()) continue;
        if (auto prov = r.provenance(*f, base + ".provenance." + std::string(field))) {
          s.provenance[pillarFieldPath(id, field)] = *prov;
        }
      }
    }
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));

  s.model = *model;
  double rawSum = 0.0;
  for (PillarId id : kAllPillars) rawSum += s.model.rawWeight(id);
  if (std::fabs(rawSum - 1.0) > kDomainTolerance) {
    s.provenance["pillars.weights"] = {
        ProvenanceSource::Derived,
        "raw weights sum to " + shortNumber(rawSum) + "; normalized to sum to 1"};
  }
  return s;
}

Scenario loadScenarioText(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ValidationError("$", std::string("malformed JSON: ") + e.what());
  }
  return loadScenario(doc);
}

Scenario loadScenarioFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("$", "cannot read file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return loadScenarioText(buf.str());
}

Json serializeScenario(const Scenario& s) {
  Json doc = Json::object();
  doc["id"] = s.id;
  doc["name"] = s.name;
  doc["description"] = s.description;
  doc["version"] = s.version;

  Json model = serializeModel(s.model);
  Json rest = Json::object();
  std::map<std::string, Provenance> remaining = s.provenance;
  for (PillarId id : kAllPillars) {
    Json& p = model["pillars"][std::string(pillarKey(id))];
    Json prov = Json::object();
    for (std::string_view field : {"a", "w_raw"}) {
      auto it = remaining.find(pillarFieldPath(id, field));
      if (it == remaining.end()) continue;
      prov[std::string(field)] = provenanceJson(it->second);
      remaining.erase(it);
    }
    if (!prov.empty()) p["provenance"] = prov;
  }
  for (auto& [key, value] : model.items()) doc[key] = value;

  if (s.muMode.isExogenous()) {
    doc["mu_mode"] = Json{{"mode", "exogenous"}, {"mu", s.muMode.mu}};
  } else {
    doc["mu_mode"] = Json{{"mode", "endogenous"}};
  }

  Json checklist = Json::array();
  for (const auto& c : s.checklist) {
    checklist.push_back(Json{{"name", c.name},
                             {"benefitScore", c.benefitScore},
                             {"exposureScore", c.exposureScore},
                             {"notes", c.notes}});
  }
  doc["checklist"] = checklist;

  Json guardrails = Json::array();
  for (const auto& g : s.guardrails) {
    guardrails.push_back(Json{{"metricId", g.metricId},
                              {"comparator", std::string(comparatorSymbol(g.comparator))},
                              {"threshold", g.threshold},
                              {"unit", std::string(metricUnitName(g.unit))}});
  }
  doc["guardrails"] = guardrails;

  Json prov = Json::object();
  for (const auto& [key, p] : remaining) prov[key] = provenanceJson(p);
  doc["provenance"] = prov;
  return doc;
}

std::string dumpScenario(const Scenario& scenario) {
  return serializeScenario(scenario).dump(2) + "\n";
}

std::vector<MetricObservation> loadObservations(const Json& document) {
  std::vector<ValidationIssue> issues;
  Reader r(issues);
  const Json* list = &document;
  std::string prefix = "";
  if (document.is_object()) {
    list = r.array(document, "observations", "observations");
    prefix = "observations";
    if (list == nullptr && !document.contains("observations")) r.fail("observations", "required");
  } else if (!document.is_array()) {
    r.fail("$", "must be an array of observations or { \"observations\": [...] }");
    list = nullptr;
  }
  std::vector<MetricObservation> out;
  if (list != nullptr) {
    for (std::size_t i = 0; i < list->size(); ++i) {
      const std::string path = prefix + "[" + std::to_string(i) + "]";
      const Json& item = (*list)[i];
      if (!item.is_object()) {
        r.fail(path, "must be an object");
        continue;
      }
      r.rejectUnknown(item, {"metricId", "value", "period"}, path);
      MetricObservation obs;
      if (auto m = r.string(item, "metricId", path + ".metricId", true)) obs.metricId = *m;
      if (auto v = r.number(item, "value", path + ".value", anyValue, "must be finite")) {
        obs.value = *v;
      }
      if (auto p = r.string(item, "period", path + ".period", true)) obs.period = *p;
      out.push_back(std::move(obs));
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return out;
}

}  // namespace sovai
