#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gvcp {

enum class ErrorCode {
  MalformedLine,
  CostOrderingViolation,
  DuplicateEdge,
  SelfLoop,
  VertexOutOfRange,
  LengthMismatch,
  InvalidParameter,
  InstanceTooLarge,
  PopulationTooSmall,
  EmptyPopulation,
  CutOutOfRange,
  ConfigInvariantViolation,
  WrongPopulationSize,
  MissingJobConfig,
  JobFailure,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "malformed-line";
    case ErrorCode::CostOrderingViolation: return "cost-ordering-violation";
    case ErrorCode::DuplicateEdge: return "duplicate-edge";
    case ErrorCode::SelfLoop: return "self-loop";
    case ErrorCode::VertexOutOfRange: return "vertex-out-of-range";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::InstanceTooLarge: return "instance-too-large";
    case ErrorCode::PopulationTooSmall: return "population-too-small";
    case ErrorCode::EmptyPopulation: return "empty-population";
    case ErrorCode::CutOutOfRange: return "cut-out-of-range";
    case ErrorCode::ConfigInvariantViolation: return "config-invariant-violation";
    case ErrorCode::WrongPopulationSize: return "wrong-population-size";
    case ErrorCode::MissingJobConfig: return "missing-job-config";
    case ErrorCode::JobFailure: return "job-failure";
  }
  return "unknown";
}

/// Library-wide exception. Parse errors also carry the 1-based line number.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(code, what, line)), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string format(ErrorCode code, const std::string& what, std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) out += " (line " + std::to_string(*line) + ")";
    out += ": ";
    out += what;
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace gvcp
