#pragma once

#include <stdexcept>
#include <string>

namespace churnforge {

// Domain-level failure (bad data, empty inputs, infeasible requests).
// The CLI maps these to exit code 1 with a machine-readable payload.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace churnforge
