#pragma once

#include "sovai/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sovai {

/// Where a number in a scenario came from.
enum class ProvenanceSource { Paper, Illustrative, User, Derived };

std::string_view provenanceSourceName(ProvenanceSource s);
std::optional<ProvenanceSource> parseProvenanceSource(std::string_view text);

struct Provenance {
  ProvenanceSource source = ProvenanceSource::User;
  std::string note;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Endogenous: mu is the budget multiplier. Exogenous: mu is given (e.g. an
/// estimate of the marginal cost of public funds) and the budget is implied.
struct MuMode {
  enum class Kind { Endogenous, Exogenous } kind = Kind::Endogenous;
  double mu = 0.0;  ///< only meaningful when exogenous

  static MuMode endogenous() { return {}; }
  static MuMode exogenous(double mu) { return {Kind::Exogenous, mu}; }
  bool isExogenous() const { return kind == Kind::Exogenous; }

  friend bool operator==(const MuMode&, const MuMode&) = default;
};

/// One notch of openness, scored by an analyst on a shared scale.
struct ChecklistIncrement {
  std::string name;
  double benefitScore = 0.0;
  double exposureScore = 0.0;
  std::string notes;

  friend bool operator==(const ChecklistIncrement&, const ChecklistIncrement&) = default;
};

struct ChecklistDecision {
  std::string name;
  bool approved = false;
  double margin = 0.0;  ///< benefit - exposure

  friend bool operator==(const ChecklistDecision&, const ChecklistDecision&) = default;
};

enum class Comparator { Greater, GreaterEqual, Less, LessEqual };

std::string_view comparatorSymbol(Comparator c);
std::optional<Comparator> parseComparator(std::string_view text);
bool compare(double observed, Comparator c, double threshold);

enum class MetricUnit { Fraction, Count, Hours };

std::string_view metricUnitName(MetricUnit u);
std::optional<MetricUnit> parseMetricUnit(std::string_view text);

struct GuardrailTarget {
  std::string metricId;
  Comparator comparator = Comparator::GreaterEqual;
  double threshold = 0.0;
  MetricUnit unit = MetricUnit::Fraction;

  friend bool operator==(const GuardrailTarget&, const GuardrailTarget&) = default;
};

struct MetricObservation {
  std::string metricId;
  double value = 0.0;
  std::string period;  ///< e.g. "2025-Q3"; periods order lexicographically

  friend bool operator==(const MetricObservation&, const MetricObservation&) = default;
};

enum class GuardrailStatus { Pass, Fail, NoData };

std::string_view guardrailStatusName(GuardrailStatus s);

struct GuardrailResult {
  GuardrailTarget target;
  std::optional<double> observed;
  std::string period;  ///< period of the observation used; empty when no data
  GuardrailStatus status = GuardrailStatus::NoData;

  bool pass() const { return status == GuardrailStatus::Pass; }
};

struct Scenario {
  std::string id;
  std::string name;
  std::string description;
  EconomyModel model;
  MuMode muMode;
  std::vector<ChecklistIncrement> checklist;
  std::vector<GuardrailTarget> guardrails;
  /// Keyed by field path, e.g. "pillars.data.a", "openness.alpha", "guardrails[0].threshold".
  std::map<std::string, Provenance> provenance;
  int version = 1;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// approved <=> benefit >= exposure (ties approve); margin = benefit - exposure.
std::vector<ChecklistDecision> evaluateChecklist(const std::vector<ChecklistIncrement>& checklist);

/// Each target is judged against its latest observation by period (the last
/// listed wins among equal periods). Targets with no observation are NoData.
std::vector<GuardrailResult> evaluateGuardrails(const std::vector<GuardrailTarget>& targets,
                                                const std::vector<MetricObservation>& observations);

/// India (two marginal-cost-of-funds variants) and Gulf archetypes.
std::vector<Scenario> builtinScenarios();

/// Looks a built-in scenario up by id.
std::optional<Scenario> builtinScenario(std::string_view id);

}  // namespace sovai
