#include "cotrep/error.hpp"

namespace cotrep {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kTokenizationFailure: return "TokenizationFailure";
    case ErrorKind::kBackendUnavailable: return "BackendUnavailable";
    case ErrorKind::kGenerationUnsupported: return "GenerationUnsupported";
    case ErrorKind::kHookDimMismatch: return "HookDimMismatch";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kLayerOutOfRange: return "LayerOutOfRange";
    case ErrorKind::kDumpCorrupt: return "DumpCorrupt";
    case ErrorKind::kSampleNotFound: return "SampleNotFound";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kEmptyQuestion: return "EmptyQuestion";
    case ErrorKind::kUnknownTask: return "UnknownTask";
    case ErrorKind::kSchemaError: return "SchemaError";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace cotrep
