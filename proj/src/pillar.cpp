#include "sovai/pillar.hpp"

#include "sovai/errors.hpp"

#include <algorithm>
#include <cctype>

namespace sovai {

std::string_view pillarKey(PillarId id) {
  switch (id) {
    case PillarId::Data:
      return "data";
    case PillarId::Compute:
      return "compute";
    case PillarId::Model:
      return "model";
    case PillarId::Norms:
      return "norms";
  }
  return "unknown";
}

std::string_view pillarName(PillarId id) {
  switch (id) {
    case PillarId::Data:
      return "Data";
    case PillarId::Compute:
      return "Compute";
    case PillarId::Model:
      return "Model";
    case PillarId::Norms:
      return "Norms";
  }
  return "Unknown";
}

std::optional<PillarId> parsePillar(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (PillarId id : kAllPillars) {
    if (lowered == pillarKey(id)) {
      return id;
    }
  }
  return std::nullopt;
}

namespace {

std::string summarize(const std::vector<ValidationIssue>& issues) {
  std::string out = "validation failed";
  for (const auto& issue : issues) {
    out += "; " + issue.path + ": " + issue.reason;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(summarize(issues)), issues_(std::move(issues)) {}

ValidationError::ValidationError(std::string path, std::string reason)
    : ValidationError(std::vector<ValidationIssue>{{std::move(path), std::move(reason)}}) {}

}  // namespace sovai
