#pragma once

#include <stdexcept>
#include <string>

namespace cotrep {

enum class ErrorKind {
  kInvalidConfig,
  kTokenizationFailure,
  kBackendUnavailable,
  kGenerationUnsupported,
  kHookDimMismatch,
  kDimMismatch,
  kLayerOutOfRange,
  kDumpCorrupt,
  kSampleNotFound,
  kDegenerateInput,
  kEmptyQuestion,
  kUnknownTask,
  kSchemaError,
  kIoError,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind() when the
// distinction matters (the CLI maps kinds onto exit codes).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cotrep
