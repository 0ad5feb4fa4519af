#include "sovai/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace sovai {

std::string_view provenanceSourceName(ProvenanceSource s) {
  switch (s) {
    case ProvenanceSource::Paper: return "paper";
    case ProvenanceSource::Illustrative: return "illustrative";
    case ProvenanceSource::User: return "user";
    case ProvenanceSource::Derived: return "derived";
  }
  return "user";
}

std::optional<ProvenanceSource> parseProvenanceSource(std::string_view text) {
  for (auto s : {ProvenanceSource::Paper, ProvenanceSource::Illustrative, ProvenanceSource::User,
                 ProvenanceSource::Derived}) {
    if (provenanceSourceName(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view comparatorSymbol(Comparator c) {
  switch (c) {
    case Comparator::Greater: return ">";
    case Comparator::GreaterEqual: return ">=";
    case Comparator::Less: return "<";
    case Comparator::LessEqual: return "<=";
  }
  return ">=";
}

std::optional<Comparator> parseComparator(std::string_view text) {
  if (text == ">") return Comparator::Greater;
  if (text == ">=" || text == "≥") return Comparator::GreaterEqual;
  if (text == "<") return Comparator::Less;
  if (text == "<=" || text == "≤") return Comparator::LessEqual;
  return std::nullopt;
}

bool compare(double observed, Comparator c, double threshold) {
  switch (c) {
    case Comparator::Greater: return observed > threshold;
    case Comparator::GreaterEqual: return observed >= threshold;
    case Comparator::Less: return observed < threshold;
    case Comparator::LessEqual: return observed <= threshold;
  }
  return false;
}

std::string_view metricUnitName(MetricUnit u) {
  switch (u) {
    case MetricUnit::Fraction: return "fraction";
    case MetricUnit::Count: return "count";
    case MetricUnit::Hours: return "hours";
  }
  return "fraction";
}

std::optional<MetricUnit> parseMetricUnit(std::string_view text) {
  for (auto u : {MetricUnit::Fraction, MetricUnit::Count, MetricUnit::Hours}) {
    if (metricUnitName(u) == text) return u;
  }
  return std::nullopt;
}

std::string_view guardrailStatusName(GuardrailStatus s) {
  switch (s) {
    case GuardrailStatus::Pass: return "pass";
    case GuardrailStatus::Fail: return "fail";
    case GuardrailStatus::NoData: return "no_data";
  }
  return "no_data";
}

std::vector<ChecklistDecision> evaluateChecklist(const std::vector<ChecklistIncrement>& checklist) {
  std::vector<ChecklistDecision> out;
  out.reserve(checklist.size());
  for (const auto& item : checklist) {
    if (!std::isfinite(item.benefitScore) || !std::isfinite(item.exposureScore) ||
        item.benefitScore < 0.0 || item.exposureScore < 0.0) {
      throw DomainError("checklist item '" + item.name + "': scores must be finite and >= 0");
    }
    out.push_back({item.name, item.benefitScore >= item.exposureScore,
                   item.benefitScore - item.exposureScore});
  }
  return out;
}

std::vector<GuardrailResult> evaluateGuardrails(const std::vector<GuardrailTarget>& targets,
                                                const std::vector<MetricObservation>& observations) {
  std::vector<GuardrailResult> out;
  out.reserve(targets.size());
  for (const auto& target : targets) {
    const MetricObservation* latest = nullptr;
    for (const auto& obs : observations) {
      if (obs.metricId != target.metricId) continue;
      if (latest == nullptr || obs.period >= latest->period) latest = &obs;
    }
    GuardrailResult r{target, std::nullopt, "", GuardrailStatus::NoData};
    if (latest != nullptr && std::isfinite(latest->value)) {
      r.observed = latest->value;
      r.period = latest->period;
      r.status = compare(latest->value, target.comparator, target.threshold) ? GuardrailStatus::Pass
                                                                             : GuardrailStatus::Fail;
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in archetypes

namespace {

constexpr auto kPaper = ProvenanceSource::Paper;
constexpr auto kIllustrative = ProvenanceSource::Illustrative;

struct PillarSpec {
  double a;
  double w;
};

void labelModel(Scenario& s, const PillarMap<std::string>& aNotes, const std::string& wNote,
                const std::string& alphaNote, ProvenanceSource alphaSource) {
  for (PillarId id : kAllPillars) {
    const std::string base = "pillars." + std::string(pillarKey(id));
    s.provenance[base + ".a"] = {kIllustrative, aNotes[id]};
    s.provenance[base + ".w_raw"] = {kIllustrative, wNote};
  }
  s.provenance["theta"] = {kIllustrative, ""};
  s.provenance["openness.g"] = {kIllustrative, "benefit scale"};
  s.provenance["openness.k"] = {kIllustrative, "benefit curvature"};
  s.provenance["openness.p"] = {kIllustrative, "exposure per unit of openness"};
  s.provenance["openness.lambda"] = {kIllustrative, "risk sensitivity"};
  s.provenance["openness.alpha"] = {alphaSource, alphaNote};
  s.provenance["budget"] = {kIllustrative, "abstract budget units"};
}

void addChecklist(Scenario& s, std::string name, double benefit, double exposure,
                  std::string notes) {
  const std::size_t i = s.checklist.size();
  s.checklist.push_back({std::move(name), benefit, exposure, std::move(notes)});
  const std::string base = "checklist[" + std::to_string(i) + "]";
  s.provenance[base + ".benefitScore"] = {kIllustrative, "analyst score, 0-10 scale"};
  s.provenance[base + ".exposureScore"] = {kIllustrative, "analyst score, 0-10 scale"};
}

void addGuardrail(Scenario& s, std::string metricId, Comparator c, double threshold,
                  ProvenanceSource source, std::string note, MetricUnit unit = MetricUnit::Fraction) {
  const std::size_t i = s.guardrails.size();
  s.guardrails.push_back({std::move(metricId), c, threshold, unit});
  s.provenance["guardrails[" + std::to_string(i) + "].threshold"] = {source, std::move(note)};
}

EconomyModel makeModel(const PillarMap<PillarSpec>& spec, double theta, double alpha,
                       double budget) {
  PillarMap<PillarParams> pillars{};
  for (PillarId id : kAllPillars) pillars[id] = {spec[id].a, spec[id].w};
  OpennessParams open{1.0, 4.0, 0.3, 1.0, alpha};
  return EconomyModel(pillars, theta, open, budget);
}

Scenario india(std::string id, std::string name, double mu, std::string muNote) {
  Scenario s{std::move(id),
             std::move(name),
             "Footholds in data, compute and norms with weaker model autonomy; "
             "spending gated at an exogenous marginal cost of public funds.",
             makeModel({{{{12.0, 0.3}, {10.0, 0.3}, {4.0, 0.2}, {14.0, 0.2}}}}, 0.5, 0.7, 0.1),
             MuMode::exogenous(mu),
             {},
             {},
             {},
             1};
  labelModel(s,
             {{"dataset curation and reuse", "public GPU capacity", "low: no homegrown foundation model yet",
               "standards and safety institutions"}},
             "policy scoring", "policy weight on sovereignty, alpha ~ 0.7", kPaper);
  s.provenance["theta"] = {kIllustrative, "moderate data x compute complementarity"};
  s.provenance["mu_mode.mu"] = {kPaper, std::move(muNote)};

  addChecklist(s, "Open-weight model participation", 6.0, 3.0,
               "speed-to-deploy; low exit cost");
  addChecklist(s, "Foreign cloud APIs for sensitive public services", 5.0, 8.0,
               "lock-in and cross-border compliance risk");
  addChecklist(s, "Joint standards and safety research", 4.0, 1.0, "");
  addChecklist(s, "Imported accelerators with exit clauses", 5.0, 5.0,
               "CAPEX avoided vs migrate/retrain cost");

  addGuardrail(s, "gpu_utilization", Comparator::Greater, 0.75, kPaper,
               "joint D x C OKR: more than 75% utilization");
  addGuardrail(s, "indic_dataset_booked_hours", Comparator::Greater, 0.40, kPaper,
               "joint D x C OKR: more than 40% of booked hours tied to Indic datasets");
  addGuardrail(s, "public_models_with_predeployment_cards", Comparator::GreaterEqual, 1.0,
               kIllustrative, "ModelOps gate: cards before deployment");
  addGuardrail(s, "model_updates_with_change_logs", Comparator::GreaterEqual, 1.0, kIllustrative,
               "ModelOps gate: change logs for updates and RLHF");
  addGuardrail(s, "high_risk_models_bias_safety_audited", Comparator::GreaterEqual, 1.0,
               kIllustrative, "ModelOps gate: bias/safety audits for high-risk use");
  return s;
}

Scenario gulf() {
  Scenario s{"gulf",
             "Gulf archetype",
             "State-led path with Arabic-first models and sovereign cloud: high weight on "
             "sovereignty, low effective price of funds, strong data x compute complementarity.",
             makeModel({{{{10.0, 0.3}, {12.0, 0.3}, {6.0, 0.25}, {10.0, 0.15}}}}, 1.2, 0.8, 0.3),
             MuMode::exogenous(1.1),
             {},
             {},
             {},
             1};
  labelModel(s,
             {{"Arabic dialect data trusts", "sovereign cloud clusters", "Arabic-first LLMs",
               "audit and incident notification"}},
             "policy scoring",
             "above the India value (high policy weight on sovereignty)", kIllustrative);
  s.provenance["theta"] = {kIllustrative, "above the India value (strong complementarity)"};
  s.provenance["mu_mode.mu"] = {kIllustrative, "below the India range (lower effective mu)"};

  addChecklist(s, "Hyperscaler partnership with assurance agreement", 7.0, 4.0,
               "assurance terms lower exposure; residency kept local");
  addChecklist(s, "Open-source Arabic model release", 6.0, 2.0, "");
  addChecklist(s, "Offshore inference for government services", 3.0, 7.0,
               "sensitivity of data; cross-border compliance");

  addGuardrail(s, "sovereign_gpu_utilization", Comparator::Greater, 0.75, kPaper,
               "more than 75% sovereign GPU utilization");
  addGuardrail(s, "arabic_booked_hours", Comparator::GreaterEqual, 0.40, kPaper,
               "40% of booked hours tied to Arabic fine-tunes/evals");
  addGuardrail(s, "verifiable_public_datasets", Comparator::Greater, 0.70, kPaper,
               "more than 70% of public AI datasets from verifiable sources");
  addGuardrail(s, "low_carbon_compute", Comparator::GreaterEqual, 0.50, kPaper,
               "at least 50% of compute from low-carbon sources");
  addGuardrail(s, "high_risk_systems_audited", Comparator::GreaterEqual, 0.80, kPaper,
               "80 percent of high-risk systems audited annually");
  return s;
}

}  // namespace

std::vector<Scenario> builtinScenarios() {
  return {india("india", "India archetype", 1.54,
                "marginal cost of public funds, lower estimate (Ahmad and Stern 1987)"),
          india("india-mcpf-high", "India archetype (high MCPF)", 2.17,
                "marginal cost of public funds, upper estimate (Ahmad and Stern 1987)"),
          gulf()};
}

std::optional<Scenario> builtinScenario(std::string_view id) {
  for (auto& s : builtinScenarios()) {
    if (s.id == id) return s;
  }
  return std::nullopt;
}

}  // namespace sovai
