#pragma once

// Reading vectors: last-token activity for paired stimuli, positive minus
// negative differences, and one principal direction per layer.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cotrep/model/backend.hpp"

namespace cotrep {

class StimulusPair {
 public:
  // Throws InvalidConfig if either side is empty or both sides are equal.
  StimulusPair(std::string id, std::string negative, std::string positive);

  const std::string& id() const noexcept { return id_; }
  const std::string& negative() const noexcept { return negative_; }
  const std::string& positive() const noexcept { return positive_; }

 private:
  std::string id_;
  std::string negative_;
  std::string positive_;
};

// Last-token hidden state at every layer for one stimulus.
struct NeuralActivity {
  std::size_t n_layers = 0;
  std::size_t dim = 0;
  std::vector<float> values;  // n_layers x dim

  std::span<const float> layer(std::size_t l) const { return {values.data() + l * dim, dim}; }
};

struct ActivityPair {
  NeuralActivity negative;
  NeuralActivity positive;
};

struct DifferenceSet {
  std::vector<Eigen::MatrixXd> per_layer;  // n_pairs x dim each
  std::vector<std::string> pair_ids;

  std::size_t n_pairs() const { return pair_ids.size(); }
};

struct ReadingProvenance {
  std::size_t n_pairs = 0;
  std::string backend;
  std::string stimulus_hash;
  std::uint64_t seed = 0;
  std::string task;
  std::string mode;
  std::string source;
};

struct ReadingVector {
  std::vector<Eigen::VectorXd> per_layer;  // unit norm
  std::vector<bool> flipped;               // sign flipped by the orientation rule
  std::vector<double> explained_variance;  // top eigenvalue / total, per layer
  ReadingProvenance provenance;

  std::size_t n_layers() const { return per_layer.size(); }
  std::size_t dim() const { return per_layer.empty() ? 0 : static_cast<std::size_t>(per_layer[0].size()); }
};

struct PrincipalComponent {
  Eigen::VectorXd direction;
  double explained_variance = 0.0;
};

NeuralActivity last_token_activity(const ActivationTensor& tensor);

std::vector<ActivityPair> collect_activity(std::span<const StimulusPair> pairs, Backend& backend);

DifferenceSet differences(std::span<const ActivityPair> activities,
                          std::span<const std::string> pair_ids = {});

// Leading principal component of the mean-centered rows, unit norm, with
// its largest-magnitude coordinate made positive. A single row is
// normalized as is. Throws DegenerateInput when the rows carry no variance.
PrincipalComponent first_principal_component(const Eigen::MatrixXd& rows);

// Per-layer directions from a difference set. Each layer's difference rows
// are sign-symmetrized ({d_k} and {-d_k}) before the centered PCA, which
// keeps the shared positive-minus-negative shift as the dominant axis, then
// oriented so the mean projection of the differences is non-negative.
ReadingVector fit_reading_vector(const DifferenceSet& diffs);

// Collects activity for the first n_read pairs and fits the vector.
ReadingVector build_reading_vector(std::span<const StimulusPair> pairs, Backend& backend,
                                   std::size_t n_read);

std::string stimulus_hash(std::span<const StimulusPair> pairs);

nlohmann::json to_json(const ReadingVector& v);
ReadingVector reading_vector_from_json(const nlohmann::json& j);

}  // namespace cotrep
