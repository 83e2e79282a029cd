#pragma once

#include <stdexcept>
#include <string>

namespace factorplan {

// Raised for any domain-level validation failure: malformed spec documents,
// out-of-range indices, plan/space mismatches, infeasible budgets.
// Messages are path-qualified where a document location exists
// (e.g. "factors[2].values[1]: duplicate value id 'wood'").
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& message)
      : std::runtime_error(message) {}
};

}  // namespace factorplan
