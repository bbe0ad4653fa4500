#include "cotrep/model/playback_backend.hpp"

#include <algorithm>

#include "cotrep/error.hpp"

namespace cotrep {

PlaybackBackend::PlaybackBackend(const std::filesystem::path& dump_path)
    : PlaybackBackend(read_rcad(dump_path)) {}

PlaybackBackend::PlaybackBackend(RcadFile file)
    : file_(std::make_shared<const RcadFile>(std::move(file))) {
  descriptor_ = {"playback(" + file_->model + ")", file_->n_layers, file_->dim, 0, false};
}

const RcadSample& PlaybackBackend::find(std::string_view text) const {
  auto it = std::find_if(file_->samples.begin(), file_->samples.end(),
                         [&](const RcadSample& s) { return s.text == text; });
  if (it == file_->samples.end()) {
    const std::string shown(text.substr(0, 60));
    throw Error(ErrorKind::kSampleNotFound, "no recorded sample with text \"" + shown + "\"");
  }
  return *it;
}

TokenSequence PlaybackBackend::tokenize(std::string_view text) const {
  if (text.empty()) throw Error(ErrorKind::kTokenizationFailure, "empty prompt");
  const RcadSample& s = find(text);
  TokenSequence seq;
  seq.text = s.text;
  seq.pieces = s.token_pieces;
  // the dump does not carry vocabulary ids
  seq.ids.assign(s.activations.n_tokens(), -1);
  if (seq.pieces.empty()) seq.pieces.assign(s.activations.n_tokens(), std::string());
  return seq;
}

ActivationTensor PlaybackBackend::represent(std::string_view prompt) {
  if (prompt.empty()) throw Error(ErrorKind::kTokenizationFailure, "empty prompt");
  return find(prompt).activations;
}

GenerationResult PlaybackBackend::generate(std::string_view, const Hook&, const GenerationOptions&) {
  throw Error(ErrorKind::kGenerationUnsupported, "playback backend cannot generate");
}

std::unique_ptr<Backend> PlaybackBackend::clone() const {
  return std::make_unique<PlaybackBackend>(*this);
}

}  // namespace cotrep
