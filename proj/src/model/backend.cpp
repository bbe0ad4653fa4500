#include "cotrep/model/backend.hpp"

#include "cotrep/error.hpp"

namespace cotrep {

const char* to_string(FinishReason reason) {
  return reason == FinishReason::kEndToken ? "end_token" : "max_tokens";
}

void validate_hook(const BackendDescriptor& descriptor, const Hook& hook) {
  for (const auto& [layer, vec] : hook) {
    if (layer >= descriptor.n_layers) {
      throw Error(ErrorKind::kLayerOutOfRange,
                  "hook layer " + std::to_string(layer) + " >= n_layers " +
                      std::to_string(descriptor.n_layers));
    }
    if (vec.size() != descriptor.dim) {
      throw Error(ErrorKind::kHookDimMismatch,
                  "hook for layer " + std::to_string(layer) + " has " + std::to_string(vec.size()) +
                      " entries, model dim is " + std::to_string(descriptor.dim));
    }
  }
}

}  // namespace cotrep
