#pragma once

// Scenario documents (JSON). Top-level keys:
//
//   id, name, description, version,
//   pillars: { data|compute|model|norms: { a, w_raw, provenance: { a, w_raw } } },
//   theta, openness: { g, k, p, lambda, alpha }, budget,
//   mu_mode: { mode: "endogenous" } | { mode: "exogenous", mu },
//   checklist: [ { name, benefitScore, exposureScore, notes } ],
//   guardrails: [ { metricId, comparator: ">"|">="|"<"|"<=", threshold,
//                   unit: "fraction"|"count"|"hours" } ],
//   provenance: { "<field path>": { source, note } }
//
// Provenance entries are { source: "paper"|"illustrative"|"user"|"derived", note }.
// Numbers are written with round-trip precision.

#include "sovai/scenario.hpp"

#include "json.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sovai {

using Json = nlohmann::ordered_json;

/// Validates every field and reports all violations at once (ValidationError
/// with one issue per field path). Raw weights that do not sum to 1 are
/// normalized and a derived provenance note is recorded under "pillars.weights".
Scenario loadScenario(const Json& document);

/// Parses and validates; a syntax error is reported as a single issue at path "$".
Scenario loadScenarioText(std::string_view text);

Scenario loadScenarioFile(const std::string& path);

Json serializeScenario(const Scenario& scenario);

std::string dumpScenario(const Scenario& scenario);

/// Model section only (pillars, theta, openness, budget); issues are appended
/// with `prefix` prepended to each path. Returns nullopt if any were found.
std::optional<EconomyModel> loadModel(const Json& document,
                                      std::vector<ValidationIssue>& issues,
                                      const std::string& prefix = "");

Json serializeModel(const EconomyModel& model);

/// Accepts an array of { metricId, value, period } or { "observations": [...] }.
std::vector<MetricObservation> loadObservations(const Json& document);

}  // namespace sovai
