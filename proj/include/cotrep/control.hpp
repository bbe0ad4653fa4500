#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cotrep/model/backend.hpp"
#include "cotrep/reading.hpp"

namespace cotrep {

struct ControlConfig {
  std::vector<std::size_t> layers;
  double strength = kDefaults.control_strength;
  std::string vector_ref;  // stimulus hash of the reading vector

  // Throws InvalidConfig (empty layers, non-finite strength) or
  // LayerOutOfRange.
  void validate(std::size_t n_layers) const;
};

// The last min(10, n_layers) layer indices, ascending.
std::vector<std::size_t> default_layers(std::size_t n_layers);
inline std::vector<std::size_t> default_layers(const BackendDescriptor& d) {
  return default_layers(d.n_layers);
}

// {l -> strength * v[l]} for l in cfg.layers, in float32.
Hook make_hook(const ReadingVector& v, const ControlConfig& cfg);

GenerationResult controlled_generate(std::string_view query, const ReadingVector& v,
                                     const ControlConfig& cfg, Backend& backend,
                                     const GenerationOptions& options = {});

struct TokenDiff {
  std::size_t position = 0;  // index into the generated tokens
  std::optional<std::string> baseline;
  std::optional<std::string> controlled;
};

struct AbComparison {
  GenerationResult baseline;
  GenerationResult controlled;
  std::vector<TokenDiff> token_diff;
};

// Positions where the generated token ids differ, including the tail of the
// longer run.
std::vector<TokenDiff> diff_tokens(const TokenSequence& baseline, const TokenSequence& controlled);

// Baseline runs on a clone of `backend`, concurrently with the controlled run.
AbComparison ab_compare(std::string_view query, const ReadingVector& v, const ControlConfig& cfg,
                        Backend& backend, const GenerationOptions& options = {});

nlohmann::json comparison_report(std::string_view query, const AbComparison& cmp,
                                 const ControlConfig& cfg);

}  // namespace cotrep
