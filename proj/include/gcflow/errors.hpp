#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gcflow {

enum class ErrorCode {
  DegenerateMetric,
  StencilOutOfDomain,
  UnknownTag,
  NoNegativeRoot,
  ConstraintViolation,
  SonicDegeneracy,
  BeyondCavitation,
  CflViolation,
  FrameDrift,
  DegenerateConfiguration,
  Validation,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Collects every problem found while validating a config, not just the first.
class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(ErrorCode::Validation, join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
  static std::string join(const std::vector<std::string>& issues);
  std::vector<std::string> issues_;
};

}  // namespace gcflow
