#include "cotrep/model/toy_backend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cotrep/error.hpp"
#include "cotrep/kernels/kernels.hpp"

namespace cotrep {
namespace {

class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::vector<float> fill(std::size_t n, double stddev) {
    std::vector<float> out(n);
    for (auto& x : out) x = static_cast<float>(next() * stddev);
    return out;
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::size_t pick_heads(std::size_t dim) {
  for (std::size_t heads : {4u, 2u}) {
    if (dim % heads == 0 && dim / heads >= 8) return heads;
  }
  return 1;
}

void rms_norm(std::span<const float> x, std::span<float> out) {
  const float ms = kernels::dot(x, x) / static_cast<float>(x.size());
  const float scale = 1.0f / std::sqrt(ms + 1e-6f);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale;
}

float gelu(float x) {
  constexpr float kC = 0.7978845608028654f;  // sqrt(2/pi)
  return 0.5f * x * (1.0f + std::tanh(kC * (x + 0.044715f * x * x * x)));
}

void add_positional(std::size_t pos, std::span<float> h) {
  const std::size_t d = h.size();
  for (std::size_t i = 0; i < d; ++i) {
    const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d);
    const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
    h[i] += static_cast<float>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
  }
}

}  // namespace

ToyWeights make_toy_weights(const ToyConfig& config) {
  GaussianSource rng(config.seed);
  ToyWeights w;
  w.dim = config.dim;
  w.vocab = config.vocab;
  w.n_heads = pick_heads(config.dim);
  w.ffn_dim = 4 * config.dim;
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(config.dim));
  const double down_std = 1.0 / std::sqrt(static_cast<double>(w.ffn_dim));
  w.embedding = rng.fill(config.vocab * config.dim, 1.0);
  w.layers.resize(config.n_layers);
  for (auto& layer : w.layers) {
    layer.wq = rng.fill(config.dim * config.dim, proj_std);
    layer.wk = rng.fill(config.dim * config.dim, proj_std);
    layer.wv = rng.fill(config.dim * config.dim, proj_std);
    layer.wo = rng.fill(config.dim * config.dim, proj_std);
    layer.w_up = rng.fill(w.ffn_dim * config.dim, proj_std);
    layer.w_down = rng.fill(config.dim * w.ffn_dim, down_std);
  }
  return w;
}

// Incremental forward pass with a KV cache; one token at a time.
class ToyBackend::Session {
 public:
  Session(const ToyWeights& weights, const Hook& hook)
      : w_(weights),
        hook_(hook),
        keys_(weights.layers.size()),
        values_(weights.layers.size()),
        h_(weights.dim),
        norm_(weights.dim),
        q_(weights.dim),
        k_(weights.dim),
        v_(weights.dim),
        attn_(weights.dim),
        proj_(weights.dim),
        up_(weights.ffn_dim) {}

  // Feeds token `id` at the next position. Writes per-layer hidden states
  // (before and after the hook) into the caller's buffers, each
  // n_layers * dim floats.
  void step(std::int32_t id, std::span<float> pre_hook, std::span<float> post_hook) {
    const std::size_t d = w_.dim;
    const std::size_t pos = n_pos_++;
    std::copy_n(w_.embedding.begin() + static_cast<std::ptrdiff_t>(id) * d, d, h_.begin());
    add_positional(pos, h_);

    for (std::size_t l = 0; l < w_.layers.size(); ++l) {
      const auto& lw = w_.layers[l];
      rms_norm(h_, norm_);
      matvec(lw.wq, norm_, q_);
      matvec(lw.wk, norm_, k_);
      matvec(lw.wv, norm_, v_);
      keys_[l].insert(keys_[l].end(), k_.begin(), k_.end());
      values_[l].insert(values_[l].end(), v_.begin(), v_.end());
      attend(l, pos + 1);
      matvec(lw.wo, attn_, proj_);
      kt_.add(proj_.data(), h_.data(), h_.size());

      rms_norm(h_, norm_);
      matvec(lw.w_up, norm_, up_);
      for (auto& x : up_) x = gelu(x);
      matvec(lw.w_down, up_, proj_);
      kt_.add(proj_.data(), h_.data(), h_.size());

      std::copy(h_.begin(), h_.end(), pre_hook.begin() + static_cast<std::ptrdiff_t>(l * d));
      if (auto it = hook_.find(l); it != hook_.end()) kt_.add(it->second.data(), h_.data(), h_.size());
      std::copy(h_.begin(), h_.end(), post_hook.begin() + static_cast<std::ptrdiff_t>(l * d));
    }
  }

  std::vector<float> logits() {
    rms_norm(h_, norm_);
    std::vector<float> out(w_.vocab);
    matvec(w_.embedding, norm_, out);
    return out;
  }

 private:
  void attend(std::size_t layer, std::size_t n_keys) {
    const std::size_t d = w_.dim;
    const std::size_t hd = d / w_.n_heads;
    const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
    scores_.resize(n_keys);
    for (std::size_t head = 0; head < w_.n_heads; ++head) {
      const std::size_t off = head * hd;
      float max_score = -INFINITY;
      for (std::size_t t = 0; t < n_keys; ++t) {
        const float s = scale * kt_.dot(q_.data() + off, keys_[layer].data() + t * d + off, hd);
        scores_[t] = s;
        max_score = std::max(max_score, s);
      }
      float total = 0.0f;
      for (auto& s : scores_) {
        s = std::exp(s - max_score);
        total += s;
      }
      std::span<float> out(attn_.data() + off, hd);
      std::fill(out.begin(), out.end(), 0.0f);
      for (std::size_t t = 0; t < n_keys; ++t) {
        kt_.axpy(scores_[t] / total, values_[layer].data() + t * d + off, out.data(), hd);
      }
    }
  }

  void matvec(const std::vector<float>& w, std::span<const float> x, std::span<float> y) const {
    kt_.matvec(w.data(), x.data(), y.data(), y.size(), x.size());
  }

  const ToyWeights& w_;
  const Hook& hook_;
  const kernels::KernelTable& kt_ = kernels::active();
  std::vector<std::vector<float>> keys_, values_;
  std::vector<float> h_, norm_, q_, k_, v_, attn_, proj_, up_, scores_;
  std::size_t n_pos_ = 0;
};

ToyBackend::ToyBackend(const ToyConfig& config) : config_(config), tokenizer_(config.vocab) {
  if (config.n_layers == 0 || config.dim == 0 || config.vocab == 0) {
    throw Error(ErrorKind::kInvalidConfig, "toy backend needs n_layers, dim and vocab >= 1");
  }
  descriptor_ = {"toy(seed=" + std::to_string(config.seed) + ",layers=" +
                     std::to_string(config.n_layers) + ",dim=" + std::to_string(config.dim) +
                     ",vocab=" + std::to_string(config.vocab) + ")",
                 config.n_layers, config.dim, config.vocab, true};
  weights_ = std::make_shared<const ToyWeights>(make_toy_weights(config));
}

std::unique_ptr<Backend> ToyBackend::clone() const {
  // weights are shared and immutable; sessions own all mutable state
  return std::make_unique<ToyBackend>(*this);
}

ActivationTensor ToyBackend::represent(std::string_view prompt) {
  const TokenSequence tokens = tokenizer_.encode(prompt);
  const std::size_t n_layers = config_.n_layers;
  const std::size_t d = config_.dim;
  const Hook no_hook;
  Session session(*weights_, no_hook);
  ActivationTensor out(n_layers, tokens.size(), d);
  std::vector<float> states(n_layers * d);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    session.step(tokens.ids[t], states, states);
    for (std::size_t l = 0; l < n_layers; ++l) {
      std::copy_n(states.begin() + static_cast<std::ptrdiff_t>(l * d), d, out.at(l, t).begin());
    }
  }
  return out;
}

std::vector<float> ToyBackend::logits(std::string_view prompt) {
  const TokenSequence tokens = tokenizer_.encode(prompt);
  const Hook no_hook;
  Session session(*weights_, no_hook);
  std::vector<float> states(config_.n_layers * config_.dim);
  for (auto id : tokens.ids) session.step(id, states, states);
  return session.logits();
}

GenerationResult ToyBackend::generate(std::string_view prompt, const Hook& hook,
                                      const GenerationOptions& options) {
  validate_hook(descriptor_, hook);
  GenerationResult result;
  result.prompt_tokens = tokenizer_.encode(prompt);

  const std::size_t n_layers = config_.n_layers;
  const std::size_t d = config_.dim;
  Session session(*weights_, hook);
  std::vector<float> pre, post;  // token-major [token][layer][dim] while generating
  pre.reserve((result.prompt_tokens.size() + options.max_new_tokens) * n_layers * d);
  post.reserve(pre.capacity());

  auto feed = [&](std::int32_t id) {
    const std::size_t base = pre.size();
    pre.resize(base + n_layers * d);
    post.resize(base + n_layers * d);
    session.step(id, {pre.data() + base, n_layers * d}, {post.data() + base, n_layers * d});
  };

  for (auto id : result.prompt_tokens.ids) feed(id);

  const auto end_token = tokenizer_.end_token();
  std::vector<std::int32_t> generated;
  result.finish_reason = FinishReason::kMaxTokens;
  while (generated.size() < options.max_new_tokens) {
    const std::vector<float> logits = session.logits();
    // greedy; ties resolve to the lowest id
    const auto next = static_cast<std::int32_t>(
        std::distance(logits.begin(), std::max_element(logits.begin(), logits.end())));
    if (end_token && next == *end_token) {
      result.finish_reason = FinishReason::kEndToken;
      break;
    }
    generated.push_back(next);
    feed(next);
  }
  result.generated_tokens = tokenizer_.decode(generated);

  const std::size_t n_tokens = result.prompt_tokens.size() + generated.size();
  auto to_layer_major = [&](const std::vector<float>& token_major) {
    std::vector<float> data(token_major.size());
    for (std::size_t t = 0; t < n_tokens; ++t) {
      for (std::size_t l = 0; l < n_layers; ++l) {
        std::copy_n(token_major.begin() + static_cast<std::ptrdiff_t>((t * n_layers + l) * d), d,
                    data.begin() + static_cast<std::ptrdiff_t>((l * n_tokens + t) * d));
      }
    }
    return ActivationTensor::from_data(n_layers, n_tokens, d, std::move(data));
  };
  result.activations = to_layer_major(post);
  result.pre_hook_activations = to_layer_major(pre);
  return result;
}

}  // namespace cotrep
