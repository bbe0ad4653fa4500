#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cotrep {

// Hidden states for one prompt, layer-major [layer][token][dim], float32.
class ActivationTensor {
 public:
  ActivationTensor() = default;
  ActivationTensor(std::size_t n_layers, std::size_t n_tokens, std::size_t dim);

  // Takes ownership of `data`; throws DimMismatch on a size mismatch and
  // DumpCorrupt on non-finite entries.
  static ActivationTensor from_data(std::size_t n_layers, std::size_t n_tokens, std::size_t dim,
                                    std::vector<float> data);

  std::size_t n_layers() const noexcept { return n_layers_; }
  std::size_t n_tokens() const noexcept { return n_tokens_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> at(std::size_t layer, std::size_t token) const {
    return {data_.data() + offset(layer, token), dim_};
  }
  std::span<float> at(std::size_t layer, std::size_t token) {
    return {data_.data() + offset(layer, token), dim_};
  }

  std::span<const float> data() const noexcept { return data_; }

  bool all_finite() const;

  friend bool operator==(const ActivationTensor&, const ActivationTensor&) = default;

 private:
  std::size_t offset(std::size_t layer, std::size_t token) const {
    return (layer * n_tokens_ + token) * dim_;
  }

  std::size_t n_layers_ = 0;
  std::size_t n_tokens_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

}  // namespace cotrep
