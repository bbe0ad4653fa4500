#pragma once

// RCAD v1 activation dumps.
//
//   bytes 0-3   magic "RCAD"
//   byte  4     version (1)
//   bytes 5-8   u32 little-endian JSON header length N
//   N bytes     UTF-8 JSON header:
//               {model, n_layers, dim, dtype: "f32le",
//                samples: [{id, text, n_tokens, token_pieces}], ...}
//   payload     per sample, in header order: n_layers * n_tokens * dim
//               little-endian float32, layer-major
//
// Unknown header keys (e.g. "layer_convention") are preserved.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "cotrep/model/activation.hpp"

namespace cotrep {

inline constexpr char kRcadMagic[4] = {'R', 'C', 'A', 'D'};
inline constexpr std::uint8_t kRcadVersion = 1;

struct RcadSample {
  std::string id;
  std::string text;
  std::vector<std::string> token_pieces;
  ActivationTensor activations;
};

struct RcadFile {
  std::string model;
  std::size_t n_layers = 0;
  std::size_t dim = 0;
  nlohmann::json extra_header = nlohmann::json::object();
  std::vector<RcadSample> samples;
};

std::vector<std::uint8_t> encode_rcad(const RcadFile& file);

// Throws DumpCorrupt on bad magic/version, malformed header or a payload
// whose length disagrees with the header.
RcadFile decode_rcad(const std::vector<std::uint8_t>& bytes);

// Header only, without materializing tensors.
nlohmann::json decode_rcad_header(const std::vector<std::uint8_t>& bytes);

void write_rcad(const std::filesystem::path& path, const RcadFile& file);

// Throws BackendUnavailable if the file cannot be opened.
RcadFile read_rcad(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Writes via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace cotrep
