#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wise {

enum class ErrorCode {
  MalformedXml,
  MissingCaseId,
  MissingActivity,
  MissingColumn,
  BadTimestamp,
  EmptyCaseId,
  MalformedCsv,
  SchemaViolation,
  WeightOutOfRange,
  EmptyEquilibriumGroup,
  DuplicateViewName,
  UnknownFeature,
  NonCategoricalFeature,
  UnknownView,
  NonConformingTemplate,
  AdvisorUnreachable,
  AdvisorMalformedResponse,
  InvalidArgument,
  Io,
};

/// Machine-readable name, e.g. "UnknownView". Used in the HTTP error envelope.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wise
