#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sovai {

/// Centralized numeric tolerances.
inline constexpr double kDomainTolerance = 1e-9;
inline constexpr double kGradientCheckTolerance = 1e-6;

/// A violated precondition on a model parameter or function argument.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One invariant violation found while validating a document.
struct ValidationIssue {
  std::string path;
  std::string reason;

  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

/// Carries every violation found in a document (validation is not fail-fast).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  ValidationError(std::string path, std::string reason);

  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

}  // namespace sovai
