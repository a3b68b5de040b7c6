#pragma once

#include <stdexcept>
#include <string>

namespace axlab {

// Two families: usage errors (bad names, bad arguments) and domain errors
// (things that are well-posed but fail: budgets, membership, malformed files).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : Error {
  using Error::Error;
};
struct NameError : UsageError {
  using UsageError::UsageError;
};
struct ArgumentError : UsageError {
  using UsageError::UsageError;
};
struct ParameterError : UsageError {
  using UsageError::UsageError;
};

struct DomainError : Error {
  using Error::Error;
};
struct DimensionError : DomainError {
  using DomainError::DomainError;
};
struct BudgetError : DomainError {
  using DomainError::DomainError;
};
struct MembershipError : DomainError {
  using DomainError::DomainError;
};
struct TemplateError : DomainError {
  using DomainError::DomainError;
};
struct WalkError : DomainError {
  using DomainError::DomainError;
};

struct ParseError : DomainError {
  int line;
  ParseError(int line_no, const std::string& what)
      : DomainError(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what : what),
        line(line_no) {}
};

}  // namespace axlab
