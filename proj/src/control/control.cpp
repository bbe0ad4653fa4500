#include "cotrep/control.hpp"

#include <cmath>
#include <future>

#include "cotrep/error.hpp"

namespace cotrep {

void ControlConfig::validate(std::size_t n_layers) const {
  if (layers.empty()) throw Error(ErrorKind::kInvalidConfig, "control layer set is empty");
  if (!std::isfinite(strength)) throw Error(ErrorKind::kInvalidConfig, "strength must be finite");
  for (std::size_t l : layers) {
    if (l >= n_layers) {
      throw Error(ErrorKind::kLayerOutOfRange, "control layer " + std::to_string(l) +
                                                   " >= n_layers " + std::to_string(n_layers));
    }
  }
}

std::vector<std::size_t> default_layers(std::size_t n_layers) {
  const std::size_t count = std::min(kDefaults.control_layer_count, n_layers);
  std::vector<std::size_t> out;
  for (std::size_t l = n_layers - count; l < n_layers; ++l) out.push_back(l);
  return out;
}

Hook make_hook(const ReadingVector& v, const ControlConfig& cfg) {
  cfg.validate(v.n_layers());
  Hook hook;
  for (std::size_t l : cfg.layers) {
    const auto& dir = v.per_layer[l];
    std::vector<float> add(static_cast<std::size_t>(dir.size()));
    for (Eigen::Index j = 0; j < dir.size(); ++j) {
      add[static_cast<std::size_t>(j)] = static_cast<float>(cfg.strength * dir(j));
    }
    hook.emplace(l, std::move(add));
  }
  return hook;
}

GenerationResult controlled_generate(std::string_view query, const ReadingVector& v,
                                     const ControlConfig& cfg, Backend& backend,
                                     const GenerationOptions& options) {
  const auto& desc = backend.descriptor();
  if (v.dim() != desc.dim || v.n_layers() != desc.n_layers) {
    throw Error(ErrorKind::kDimMismatch,
                "reading vector is " + std::to_string(v.n_layers()) + "x" + std::to_string(v.dim()) +
                    ", backend is " + std::to_string(desc.n_layers) + "x" + std::to_string(desc.dim));
  }
  cfg.validate(desc.n_layers);
  return backend.generate(query, make_hook(v, cfg), options);
}

std::vector<TokenDiff> diff_tokens(const TokenSequence& baseline, const TokenSequence& controlled) {
  std::vector<TokenDiff> out;
  const std::size_t n = std::max(baseline.size(), controlled.size());
  for (std::size_t i = 0; i < n; ++i) {
    const bool in_b = i < baseline.size();
    const bool in_c = i < controlled.size();
    if (in_b && in_c && baseline.ids[i] == controlled.ids[i]) continue;
    TokenDiff d;
    d.position = i;
    if (in_b) d.baseline = baseline.pieces[i];
    if (in_c) d.controlled = controlled.pieces[i];
    out.push_back(std::move(d));
  }
  return out;
}

AbComparison ab_compare(std::string_view query, const ReadingVector& v, const ControlConfig& cfg,
                        Backend& backend, const GenerationOptions& options) {
  // fail fast on bad inputs before spawning anything
  const auto& desc = backend.descriptor();
  if (v.dim() != desc.dim || v.n_layers() != desc.n_layers) {
    throw Error(ErrorKind::kDimMismatch, "reading vector does not match backend");
  }
  cfg.validate(desc.n_layers);

  auto twin = backend.clone();
  const std::string prompt(query);
  auto baseline = std::async(std::launch::async,
                             [&] { return twin->generate(prompt, Hook{}, options); });
  AbComparison cmp;
  cmp.controlled = controlled_generate(prompt, v, cfg, backend, options);
  cmp.baseline = baseline.get();
  cmp.token_diff = diff_tokens(cmp.baseline.generated_tokens, cmp.controlled.generated_tokens);
  return cmp;
}

nlohmann::json comparison_report(std::string_view query, const AbComparison& cmp,
                                 const ControlConfig& cfg) {
  nlohmann::json diff = nlohmann::json::array();
  for (const auto& d : cmp.token_diff) {
    diff.push_back({{"position", d.position},
                    {"baseline", d.baseline ? nlohmann::json(*d.baseline) : nlohmann::json()},
                    {"controlled", d.controlled ? nlohmann::json(*d.controlled) : nlohmann::json()}});
  }
  return {{"query", query},
          {"baseline_text", cmp.baseline.generated_tokens.text},
          {"controlled_text", cmp.controlled.generated_tokens.text},
          {"token_diff", std::move(diff)},
          {"alpha", cfg.strength},
          {"layers", cfg.layers}};
}

}  // namespace cotrep
