#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cotrep/config.hpp"
#include "cotrep/model/activation.hpp"
#include "cotrep/model/tokenizer.hpp"

namespace cotrep {

struct BackendDescriptor {
  std::string name;
  std::size_t n_layers = 0;
  std::size_t dim = 0;
  std::size_t vocab_size = 0;
  bool supports_generation = false;
};

// Additive per-layer vectors applied to the residual-stream output of the
// keyed layers, at every position, for the whole generation.
using Hook = std::map<std::size_t, std::vector<float>>;

enum class FinishReason { kMaxTokens, kEndToken };

struct GenerationOptions {
  std::size_t max_new_tokens = kDefaults.max_new_tokens;
  Decoding decoding = kDefaults.decoding;
};

struct GenerationResult {
  TokenSequence prompt_tokens;
  TokenSequence generated_tokens;
  // Post-hook hidden states over prompt + generated tokens.
  ActivationTensor activations;
  // Same positions, captured before the hook was added. Equal to
  // `activations` when no hook is active.
  ActivationTensor pre_hook_activations;
  FinishReason finish_reason = FinishReason::kMaxTokens;
};

const char* to_string(FinishReason reason);

// Model contract. Instances are not reentrant: serialize calls per
// instance, or clone() one instance per worker.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const BackendDescriptor& descriptor() const = 0;

  virtual TokenSequence tokenize(std::string_view text) const = 0;

  // Hidden states for every token of `prompt`.
  virtual ActivationTensor represent(std::string_view prompt) = 0;

  // Greedy decoding with optional additive hooks. Throws
  // GenerationUnsupported, HookDimMismatch or LayerOutOfRange.
  virtual GenerationResult generate(std::string_view prompt, const Hook& hook,
                                    const GenerationOptions& options) = 0;

  virtual std::unique_ptr<Backend> clone() const = 0;
};

// Throws LayerOutOfRange / HookDimMismatch when `hook` does not fit.
void validate_hook(const BackendDescriptor& descriptor, const Hook& hook);

}  // namespace cotrep
