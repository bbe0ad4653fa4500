#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "cotrep/model/backend.hpp"

namespace cotrep {

struct ToyConfig {
  std::uint64_t seed = kDefaults.toy_seed;
  std::size_t n_layers = kDefaults.toy_layers;
  std::size_t dim = kDefaults.toy_dim;
  std::size_t vocab = kDefaults.toy_vocab;
};

struct ToyLayerWeights {
  // dim x dim, row-major; q/k/v/o projections
  std::vector<float> wq, wk, wv, wo;
  // ffn_dim x dim and dim x ffn_dim
  std::vector<float> w_up, w_down;
};

struct ToyWeights {
  std::size_t dim = 0;
  std::size_t vocab = 0;
  std::size_t n_heads = 0;
  std::size_t ffn_dim = 0;
  std::vector<float> embedding;  // vocab x dim, tied with the output head
  std::vector<ToyLayerWeights> layers;
};

// Desk-scale decoder-only transformer with seeded weights.
//
// Per position t with token id x:
//   h = E[x] + P(t),  P(t)[2i] = sin(t / 10000^(2i/d)),  P(t)[2i+1] = cos(same)
//   for each layer:  h += Wo * attn(rms(h));  h += Wdown * gelu(Wup * rms(h));  h += hook[layer]
//   logits = E * rms(h)
// rms(x) = x / sqrt(mean(x^2) + 1e-6). Attention is causal multi-head with
// 1/sqrt(head_dim) scaling; gelu uses the tanh approximation. The recorded
// hidden state of a layer is h after the hook.
class ToyBackend final : public Backend {
 public:
  // Throws InvalidConfig when any count is zero.
  explicit ToyBackend(const ToyConfig& config);

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  TokenSequence tokenize(std::string_view text) const override { return tokenizer_.encode(text); }
  ActivationTensor represent(std::string_view prompt) override;
  GenerationResult generate(std::string_view prompt, const Hook& hook,
                            const GenerationOptions& options) override;
  std::unique_ptr<Backend> clone() const override;

  // Next-token logits after the last prompt token.
  std::vector<float> logits(std::string_view prompt);

  const ToyConfig& config() const noexcept { return config_; }
  const ToyWeights& weights() const noexcept { return *weights_; }

 private:
  class Session;

  ToyConfig config_;
  BackendDescriptor descriptor_;
  ByteTokenizer tokenizer_;
  std::shared_ptr<const ToyWeights> weights_;
};

// Deterministic weights for `config`; same seed gives the same bits on
// every platform (mt19937_64 + Box-Muller, no std distributions).
ToyWeights make_toy_weights(const ToyConfig& config);

}  // namespace cotrep
