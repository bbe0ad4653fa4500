#include "cotrep/model/rcad.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cotrep/error.hpp"

namespace cotrep {
namespace {

constexpr std::size_t kPreambleSize = 9;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorKind::kDumpCorrupt, what); }

std::size_t header_length(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kPreambleSize) corrupt("file shorter than the 9-byte preamble");
  if (std::memcmp(bytes.data(), kRcadMagic, 4) != 0) corrupt("bad magic");
  if (bytes[4] != kRcadVersion) corrupt("unsupported version " + std::to_string(bytes[4]));
  const std::size_t n = get_u32(bytes.data() + 5);
  if (bytes.size() < kPreambleSize + n) corrupt("header length exceeds file size");
  return n;
}

std::size_t require_count(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number_unsigned()) {
    corrupt(std::string("header field '") + key + "' missing or not a non-negative integer");
  }
  return obj[key].get<std::size_t>();
}

}  // namespace

std::vector<std::uint8_t> encode_rcad(const RcadFile& file) {
  nlohmann::json header = file.extra_header.is_object() ? file.extra_header : nlohmann::json::object();
  header["model"] = file.model;
  header["n_layers"] = file.n_layers;
  header["dim"] = file.dim;
  header["dtype"] = "f32le";
  header["samples"] = nlohmann::json::array();
  for (const auto& s : file.samples) {
    if (s.activations.n_layers() != file.n_layers || s.activations.dim() != file.dim) {
      throw Error(ErrorKind::kDimMismatch, "sample '" + s.id + "' does not match file dims");
    }
    header["samples"].push_back({{"id", s.id},
                                 {"text", s.text},
                                 {"n_tokens", s.activations.n_tokens()},
                                 {"token_pieces", s.token_pieces}});
  }
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kRcadMagic, kRcadMagic + 4);
  out.push_back(kRcadVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& s : file.samples) {
    for (float x : s.activations.data()) put_u32(out, std::bit_cast<std::uint32_t>(x));
  }
  return out;
}

nlohmann::json decode_rcad_header(const std::vector<std::uint8_t>& bytes) {
  const std::size_t n = header_length(bytes);
  nlohmann::json header =
      nlohmann::json::parse(bytes.begin() + kPreambleSize,
                            bytes.begin() + static_cast<std::ptrdiff_t>(kPreambleSize + n), nullptr,
                            /*allow_exceptions=*/false);
  if (header.is_discarded() || !header.is_object()) corrupt("header is not a JSON object");
  if (!header.contains("dtype") || header["dtype"] != "f32le") corrupt("dtype must be \"f32le\"");
  if (!header.contains("samples") || !header["samples"].is_array()) corrupt("missing samples array");
  return header;
}

RcadFile decode_rcad(const std::vector<std::uint8_t>& bytes) {
  const nlohmann::json header = decode_rcad_header(bytes);
  RcadFile file;
  file.model = header.value("model", std::string());
  file.n_layers = require_count(header, "n_layers");
  file.dim = require_count(header, "dim");
  if (file.n_layers == 0 || file.dim == 0) corrupt("n_layers and dim must be >= 1");
  for (const auto& [key, value] : header.items()) {
    if (key != "model" && key != "n_layers" && key != "dim" && key != "dtype" && key != "samples") {
      file.extra_header[key] = value;
    }
  }

  std::size_t offset = kPreambleSize + header_length(bytes);
  for (const auto& entry : header["samples"]) {
    if (!entry.is_object()) corrupt("sample entry is not an object");
    RcadSample s;
    s.id = entry.value("id", std::string());
    if (!entry.contains("text") || !entry["text"].is_string()) corrupt("sample missing text");
    s.text = entry["text"].get<std::string>();
    const std::size_t n_tokens = require_count(entry, "n_tokens");
    if (entry.contains("token_pieces")) {
      s.token_pieces = entry["token_pieces"].get<std::vector<std::string>>();
      if (s.token_pieces.size() != n_tokens) {
        corrupt("sample '" + s.id + "' has " + std::to_string(s.token_pieces.size()) +
                " token pieces for n_tokens " + std::to_string(n_tokens));
      }
    }
    const std::size_t count = file.n_layers * n_tokens * file.dim;
    if (bytes.size() - offset < count * 4) corrupt("payload truncated in sample '" + s.id + "'");
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
      data[i] = std::bit_cast<float>(get_u32(bytes.data() + offset + 4 * i));
    }
    offset += count * 4;
    s.activations = ActivationTensor::from_data(file.n_layers, n_tokens, file.dim, std::move(data));
    file.samples.push_back(std::move(s));
  }
  if (offset != bytes.size()) {
    corrupt(std::to_string(bytes.size() - offset) + " trailing bytes after the last sample");
  }
  return file;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIoError, "rename to " + path.string() + ": " + ec.message());
}

void write_rcad(const std::filesystem::path& path, const RcadFile& file) {
  const auto bytes = encode_rcad(file);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

RcadFile read_rcad(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::kBackendUnavailable, "no readable dump at " + path.string());
  }
  return decode_rcad(bytes);
}

}  // namespace cotrep
