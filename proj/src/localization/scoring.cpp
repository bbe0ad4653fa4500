#include <algorithm>
#include <cmath>
#include <numeric>

#include "cotrep/error.hpp"
#include "cotrep/kernels/kernels.hpp"
#include "cotrep/localization.hpp"

namespace cotrep {

std::vector<double> zscore(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  if (sd < kDefaults.zscore_epsilon) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

std::vector<double> clip_scores(std::span<const double> normalized) {
  std::vector<double> out(normalized.size());
  std::transform(normalized.begin(), normalized.end(), out.begin(),
                 [](double x) { return std::min(x, 0.0); });
  return out;
}

ScoreTrack score_tokens(const ActivationTensor& acts, const ReadingVector& v, double delta,
                        std::span<const std::size_t> layers, std::vector<std::string> token_pieces,
                        std::size_t rationale_start) {
  if (layers.empty()) throw Error(ErrorKind::kLayerOutOfRange, "no scoring layers");
  if (v.dim() != acts.dim()) {
    throw Error(ErrorKind::kDimMismatch, "reading vector dim " + std::to_string(v.dim()) +
                                             " vs activation dim " + std::to_string(acts.dim()));
  }
  for (std::size_t l : layers) {
    if (l >= acts.n_layers() || l >= v.n_layers()) {
      throw Error(ErrorKind::kLayerOutOfRange, "scoring layer " + std::to_string(l));
    }
  }
  if (!token_pieces.empty() && token_pieces.size() != acts.n_tokens()) {
    throw Error(ErrorKind::kDimMismatch, "token pieces do not match tensor length");
  }

  ScoreTrack track;
  track.delta = delta;
  track.layers_used.assign(layers.begin(), layers.end());
  track.rationale_start = std::min(rationale_start, acts.n_tokens());
  track.token_pieces = token_pieces.empty() ? std::vector<std::string>(acts.n_tokens())
                                            : std::move(token_pieces);

  std::vector<std::vector<float>> directions;
  for (std::size_t l : layers) {
    const auto& d = v.per_layer[l];
    directions.emplace_back(d.data(), d.data() + d.size());
  }
  track.raw.resize(acts.n_tokens());
  for (std::size_t i = 0; i < acts.n_tokens(); ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < layers.size(); ++k) {
      sum += kernels::dot(acts.at(layers[k], i), directions[k]);
    }
    track.raw[i] = sum / static_cast<double>(layers.size()) - delta;
  }
  track.normalized = zscore(track.raw);
  track.clipped = clip_scores(track.normalized);
  return track;
}

nlohmann::json to_json(const ScoreTrack& track, const std::string& id) {
  nlohmann::json tokens = nlohmann::json::array();
  for (std::size_t i = 0; i < track.size(); ++i) {
    tokens.push_back({{"piece", track.token_pieces[i]},
                      {"raw", track.raw[i]},
                      {"normalized", track.normalized[i]},
                      {"clipped", track.clipped[i]}});
  }
  return {{"id", id},
          {"delta", track.delta},
          {"layers", track.layers_used},
          {"rationale_start", track.rationale_start},
          {"tokens", std::move(tokens)}};
}

ScoreTrack score_track_from_json(const nlohmann::json& j) {
  try {
    ScoreTrack t;
    t.delta = j.at("delta").get<double>();
    t.layers_used = j.at("layers").get<std::vector<std::size_t>>();
    t.rationale_start = j.value("rationale_start", std::size_t{0});
    for (const auto& tok : j.at("tokens")) {
      t.token_pieces.push_back(tok.at("piece").get<std::string>());
      t.raw.push_back(tok.at("raw").get<double>());
      t.normalized.push_back(tok.at("normalized").get<double>());
      t.clipped.push_back(tok.at("clipped").get<double>());
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("score report JSON: ") + e.what());
  }
}

}  // namespace cotrep
