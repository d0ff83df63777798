#pragma once

#include <stdexcept>
#include <string>

namespace otval {

/// Caller supplied data that violates a precondition (shapes, weights, ranges).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A solver could not produce a result (pivot limit, non-finite iterates).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// The message transcript leaked a private row.
class AuditError : public std::runtime_error {
 public:
  explicit AuditError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace otval
