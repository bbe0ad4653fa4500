#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cotrep/config.hpp"
#include "cotrep/model/activation.hpp"
#include "cotrep/reading.hpp"

namespace cotrep {

struct ScoreTrack {
  std::vector<std::string> token_pieces;
  std::vector<double> raw;         // mean_l <h_l[i], v_l> - delta
  std::vector<double> normalized;  // z-score of raw over all tokens
  std::vector<double> clipped;     // min(normalized, 0)
  double delta = kDefaults.delta;
  std::vector<std::size_t> layers_used;
  // Tokens before this index belong to the prompt and are not rendered.
  std::size_t rationale_start = 0;

  std::size_t size() const { return raw.size(); }
};

// Subtract the mean, divide by the population standard deviation. Outputs
// zeros when the deviation is below kDefaults.zscore_epsilon.
std::vector<double> zscore(std::span<const double> values);

// Elementwise min(x, 0).
std::vector<double> clip_scores(std::span<const double> normalized);

// Throws LayerOutOfRange or DimMismatch. `token_pieces` may be empty, in
// which case pieces render as empty strings.
ScoreTrack score_tokens(const ActivationTensor& acts, const ReadingVector& v, double delta,
                        std::span<const std::size_t> layers,
                        std::vector<std::string> token_pieces = {}, std::size_t rationale_start = 0);

enum class SalienceFormat { kAnsi, kHtml };

inline constexpr std::string_view kRedLegend = "red = potential wrong reasoning location";
inline constexpr std::string_view kGreenLegend = "green = reasoning snippet judged correct";

// Red for clipped < 0 with intensity |clipped| / |min clipped| over the
// rendered span; green otherwise. HTML output is a standalone document, ANSI
// uses 24-bit color escapes.
std::string render_salience(const ScoreTrack& track, SalienceFormat format);

nlohmann::json to_json(const ScoreTrack& track, const std::string& id);
ScoreTrack score_track_from_json(const nlohmann::json& j);

}  // namespace cotrep
