#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robotr1 {

enum class ErrorKind {
  // configuration
  ConfigInvalid,
  // data / validation
  MissingFile,
  MalformedRecord,
  FrameCountMismatch,
  EmptyInput,
  TooFewFrames,
  SamplingExhausted,
  TemplateFieldMissing,
  MissingAnnotation,
  UnparseableResponse,
  UnparseableVerdict,
  ScoreOutOfRange,
  ConstantInput,
  NonFiniteGradient,
  InvalidInput,
  // backend
  BackendUnavailable,
  BadRequest,
  Timeout,
};

inline std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::FrameCountMismatch: return "FrameCountMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooFewFrames: return "TooFewFrames";
    case ErrorKind::SamplingExhausted: return "SamplingExhausted";
    case ErrorKind::TemplateFieldMissing: return "TemplateFieldMissing";
    case ErrorKind::MissingAnnotation: return "MissingAnnotation";
    case ErrorKind::UnparseableResponse: return "UnparseableResponse";
    case ErrorKind::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorKind::ConstantInput: return "ConstantInput";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::BadRequest: return "BadRequest";
    case ErrorKind::Timeout: return "Timeout";
  }
  return "Unknown";
}

/// Process exit codes used by the CLI. 0 is success.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitDataError = 3,
  kExitBackendError = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }

  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::ConfigInvalid:
        return kExitConfigError;
      case ErrorKind::BackendUnavailable:
      case ErrorKind::BadRequest:
      case ErrorKind::Timeout:
        return kExitBackendError;
      default:
        return kExitDataError;
    }
  }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace robotr1
