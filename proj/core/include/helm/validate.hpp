#pragma once

#include <string>
#include <vector>

#include "helm/network.hpp"

namespace helm {

enum class Severity { kError, kWarning };

struct Issue {
  Severity severity = Severity::kError;
  std::string code;     // e.g. "row-sum", "not-singly-connected"
  std::string node;     // offending node id, empty for graph-level issues
  std::string message;
};

// Diagnostics are data. A network is valid iff `errors()` is empty; warnings
// note degenerate but usable values (clamped priors, inconsistent lambdas).
struct ValidationReport {
  std::vector<Issue> issues;

  bool ok() const;
  std::vector<Issue> errors() const;
  std::vector<Issue> warnings() const;
  bool has(const std::string& code) const;
  std::string summary() const;
};

ValidationReport validate(const VariableNetwork& network);
ValidationReport validate(const PropositionNetwork& network);

// Throws Error(kValidation) naming the first violated invariant.
void require_valid(const VariableNetwork& network);
void require_valid(const PropositionNetwork& network);

}  // namespace helm
