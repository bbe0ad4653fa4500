#include "cotrep/model/activation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cotrep/error.hpp"

namespace cotrep {

ActivationTensor::ActivationTensor(std::size_t n_layers, std::size_t n_tokens, std::size_t dim)
    : n_layers_(n_layers), n_tokens_(n_tokens), dim_(dim), data_(n_layers * n_tokens * dim, 0.0f) {}

ActivationTensor ActivationTensor::from_data(std::size_t n_layers, std::size_t n_tokens,
                                             std::size_t dim, std::vector<float> data) {
  if (data.size() != n_layers * n_tokens * dim) {
    throw Error(ErrorKind::kDimMismatch,
                "activation data holds " + std::to_string(data.size()) + " floats, expected " +
                    std::to_string(n_layers * n_tokens * dim));
  }
  ActivationTensor t;
  t.n_layers_ = n_layers;
  t.n_tokens_ = n_tokens;
  t.dim_ = dim;
  t.data_ = std::move(data);
  if (!t.all_finite()) throw Error(ErrorKind::kDumpCorrupt, "activation data has non-finite entries");
  return t;
}

bool ActivationTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace cotrep
