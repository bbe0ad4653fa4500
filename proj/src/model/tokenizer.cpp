#include "cotrep/model/tokenizer.hpp"

#include "cotrep/error.hpp"

namespace cotrep {

std::size_t utf8_sequence_length(std::string_view text, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 0;
  std::uint32_t cp = 0;
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    return 0;
  }
  if (pos + len > text.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto c = static_cast<unsigned char>(text[pos + k]);
    if ((c & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (c & 0x3F);
  }
  // overlong forms, surrogates and out-of-range code points
  static constexpr std::uint32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

TokenSequence ByteTokenizer::encode(std::string_view text) const {
  if (text.empty()) throw Error(ErrorKind::kTokenizationFailure, "empty prompt");
  TokenSequence seq;
  seq.text = std::string(text);
  seq.ids.reserve(text.size());
  seq.pieces.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t len = utf8_sequence_length(text, pos);
    if (len == 0) {
      throw Error(ErrorKind::kTokenizationFailure,
                  "malformed UTF-8 at byte " + std::to_string(pos));
    }
    for (std::size_t k = 0; k < len; ++k) {
      const auto byte = static_cast<unsigned char>(text[pos + k]);
      if (byte >= vocab_size_) {
        throw Error(ErrorKind::kTokenizationFailure,
                    "byte " + std::to_string(byte) + " outside vocabulary of " +
                        std::to_string(vocab_size_));
      }
      seq.ids.push_back(byte);
      seq.pieces.push_back(k == 0 ? std::string(text.substr(pos, len)) : std::string());
    }
    pos += len;
  }
  return seq;
}

TokenSequence ByteTokenizer::decode(std::span<const std::int32_t> ids) const {
  static const std::string kReplacement = "\xEF\xBF\xBD";
  TokenSequence seq;
  seq.ids.assign(ids.begin(), ids.end());
  seq.pieces.resize(ids.size());

  std::size_t i = 0;
  while (i < ids.size()) {
    if (ids[i] < 0 || ids[i] > 255) {
      ++i;
      continue;
    }
    // gather the maximal run of byte tokens and split it into characters
    std::size_t end = i;
    std::string bytes;
    while (end < ids.size() && ids[end] >= 0 && ids[end] <= 255) {
      bytes.push_back(static_cast<char>(ids[end]));
      ++end;
    }
    for (std::size_t pos = 0; pos < bytes.size();) {
      const std::size_t len = utf8_sequence_length(bytes, pos);
      if (len == 0) {
        seq.pieces[i + pos] = kReplacement;
        ++pos;
      } else {
        seq.pieces[i + pos] = bytes.substr(pos, len);
        pos += len;
      }
    }
    i = end;
  }
  for (const auto& p : seq.pieces) seq.text += p;
  return seq;
}

}  // namespace cotrep
