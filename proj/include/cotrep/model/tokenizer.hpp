#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cotrep {

struct TokenSequence {
  std::vector<std::int32_t> ids;
  // Aligned 1:1 with ids; concatenating them reproduces `text`.
  std::vector<std::string> pieces;
  std::string text;

  std::size_t size() const noexcept { return ids.size(); }
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

// Byte-level tokenizer: token id == byte value, plus an optional end token.
// A multi-byte UTF-8 character maps to several ids; its piece text sits on
// the lead byte and the continuation bytes carry empty pieces, so every piece
// is valid UTF-8 on its own.
class ByteTokenizer {
 public:
  static constexpr std::int32_t kEndToken = 256;

  explicit ByteTokenizer(std::size_t vocab_size) : vocab_size_(vocab_size) {}

  // Throws TokenizationFailure on empty input, malformed UTF-8, or bytes the
  // vocabulary cannot hold.
  TokenSequence encode(std::string_view text) const;

  // Ids outside the byte range decode to empty pieces; malformed byte runs
  // decode to U+FFFD.
  TokenSequence decode(std::span<const std::int32_t> ids) const;

  std::optional<std::int32_t> end_token() const {
    if (vocab_size_ > static_cast<std::size_t>(kEndToken)) return kEndToken;
    return std::nullopt;
  }

 private:
  std::size_t vocab_size_;
};

// Length of the UTF-8 sequence starting at text[pos], or 0 if malformed.
std::size_t utf8_sequence_length(std::string_view text, std::size_t pos);

}  // namespace cotrep
