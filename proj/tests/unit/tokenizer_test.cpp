#include <doctest.h>

#include "cotrep/error.hpp"
#include "cotrep/model/tokenizer.hpp"

using namespace cotrep;

TEST_SUITE("tokenizer") {

TEST_CASE("ascii text maps to its bytes") {
  ByteTokenizer tok(257);
  const auto seq = tok.encode("ab!");
  CHECK(seq.ids == std::vector<std::int32_t>{97, 98, 33});
  CHECK(seq.pieces == std::vector<std::string>{"a", "b", "!"});
  CHECK(seq.text == "ab!");
}

TEST_CASE("multi-byte characters keep the glyph on the lead byte") {
  ByteTokenizer tok(257);
  const auto seq = tok.encode("é1");
  REQUIRE(seq.size() == 3);
  CHECK(seq.pieces[0] == "é");
  CHECK(seq.pieces[1].empty());
  CHECK(seq.pieces[2] == "1");
}

TEST_CASE("decode inverts encode") {
  ByteTokenizer tok(257);
  for (std::string s : {"hello", "café ok", "∑ x", "USER: q\nASSISTANT:"}) {
    const auto enc = tok.encode(s);
    CHECK(tok.decode(enc.ids) == enc);
  }
}

TEST_CASE("empty and malformed input are tokenization failures") {
  ByteTokenizer tok(257);
  auto kind_of = [&](std::string_view s) {
    try {
      tok.encode(s);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIoError;
  };
  CHECK(kind_of("") == ErrorKind::kTokenizationFailure);
  CHECK(kind_of("\xC3") == ErrorKind::kTokenizationFailure);
  CHECK(kind_of("\xC0\xAF") == ErrorKind::kTokenizationFailure);
  CHECK(kind_of("\xED\xA0\x80") == ErrorKind::kTokenizationFailure);
  ByteTokenizer small(100);
  CHECK_THROWS_AS(small.encode("z"), Error);
}

TEST_CASE("end token exists only above 256 ids") {
  CHECK(ByteTokenizer(257).end_token() == 256);
  CHECK_FALSE(ByteTokenizer(256).end_token().has_value());
}

TEST_CASE("decode replaces invalid byte runs") {
  ByteTokenizer tok(257);
  const std::vector<std::int32_t> ids{0xC3};
  CHECK(tok.decode(ids).text == "\xEF\xBF\xBD");
}

}
