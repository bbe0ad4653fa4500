#pragma once

#include <cstddef>

namespace cotrep {

enum class Decoding { kGreedy };

// Every run-time default lives here. CLI help text, the experiment runner and
// the conformance tests all read from this table. Per-task reading-set sizes
// are in the task table (task.cpp).
struct Defaults {
  double delta = 3.5;
  std::size_t max_new_tokens = 512;
  Decoding decoding = Decoding::kGreedy;
  std::size_t control_layer_count = 10;
  double control_strength = 1.0;
  double zscore_epsilon = 1e-12;
  unsigned long long seed = 0;
  std::size_t reprompt_max_tokens = 32;

  // Toy backend shape used by the CLI when no explicit shape is given.
  unsigned long long toy_seed = 0;
  std::size_t toy_layers = 12;
  std::size_t toy_dim = 64;
  std::size_t toy_vocab = 257;
};

inline constexpr Defaults kDefaults{};

}  // namespace cotrep
