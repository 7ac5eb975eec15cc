#include "embodied/protocol.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace embodied::link {

namespace {

constexpr std::array<std::string_view, 6> kErrorNames{"Truncated",  "BadSync",     "BadVersion",
                                                      "BadLength", "BadChecksum", "UnknownSentiment"};

}  // namespace

std::string_view to_string(DecodeError e) noexcept { return kErrorNames[static_cast<std::size_t>(e)]; }

std::optional<DecodeError> decode_error_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kErrorNames.size(); ++i) {
    if (kErrorNames[i] == s) return static_cast<DecodeError>(i);
  }
  return std::nullopt;
}

ProtocolError::ProtocolError(DecodeFailure failure)
    : Error(std::string(to_string(failure.error)),
            std::string(to_string(failure.error)) + " at byte " + std::to_string(failure.offset)),
      failure_(failure) {}

std::uint8_t checksum(std::uint8_t version, std::uint8_t length, std::uint8_t payload) noexcept {
  return static_cast<std::uint8_t>(version ^ length ^ payload);
}

Frame encode_command(Sentiment s) noexcept {
  const auto payload = static_cast<std::uint8_t>(to_wire_char(s));
  return Frame{kSync, kVersion, kPayloadLen, payload, checksum(kVersion, kPayloadLen, payload)};
}

DecodeResult try_decode(std::span<const std::uint8_t> b) noexcept {
  if (b.empty()) return DecodeFailure{DecodeError::Truncated, 0};
  if (b[0] != kSync) return DecodeFailure{DecodeError::BadSync, 0};
  if (b.size() < 2) return DecodeFailure{DecodeError::Truncated, b.size()};
  if (b[1] != kVersion) return DecodeFailure{DecodeError::BadVersion, 1};
  if (b.size() < 3) return DecodeFailure{DecodeError::Truncated, b.size()};
  if (b[2] != kPayloadLen) return DecodeFailure{DecodeError::BadLength, 2};
  if (b.size() < kFrameSize) return DecodeFailure{DecodeError::Truncated, b.size()};
  if (b.size() > kFrameSize) return DecodeFailure{DecodeError::BadLength, kFrameSize};
  if (checksum(b[1], b[2], b[3]) != b[4]) return DecodeFailure{DecodeError::BadChecksum, 4};
  if (auto s = from_wire_char(static_cast<char>(b[3]))) return *s;
  return DecodeFailure{DecodeError::UnknownSentiment, 3};
}

Sentiment decode_command(std::span<const std::uint8_t> bytes) {
  auto r = try_decode(bytes);
  if (auto* f = std::get_if<DecodeFailure>(&r)) throw ProtocolError(*f);
  return std::get<Sentiment>(r);
}

void StreamParser::feed(std::uint8_t byte, std::vector<DecodeResult>& out) {
  if (buf_.empty() && byte != kSync) {
    ++skipped_;
    return;
  }
  buf_.push_back(byte);
  // Header fields are checked as soon as they arrive so a bad frame does not
  // swallow the start of the next one.
  auto r = try_decode(buf_);
  if (auto* f = std::get_if<DecodeFailure>(&r); f != nullptr && f->error == DecodeError::Truncated) {
    return;
  }
  std::vector<std::uint8_t> rest(buf_.begin() + 1, buf_.end());
  buf_.clear();
  out.push_back(r);
  if (std::holds_alternative<DecodeFailure>(r)) {
    // Resync: rescan everything after the rejected sync byte.
    ++skipped_;
    for (std::uint8_t b : rest) feed(b, out);
  }
}

std::vector<DecodeResult> StreamParser::push(std::uint8_t byte) {
  std::vector<DecodeResult> out;
  feed(byte, out);
  return out;
}

std::vector<DecodeResult> StreamParser::push(std::span<const std::uint8_t> bytes) {
  std::vector<DecodeResult> out;
  for (std::uint8_t b : bytes) feed(b, out);
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) return std::nullopt;
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

std::string format_result(const DecodeResult& r) {
  if (auto* s = std::get_if<Sentiment>(&r)) return std::string("ok:") + to_wire_char(*s);
  const auto& f = std::get<DecodeFailure>(r);
  return std::string(to_string(f.error)) + "@" + std::to_string(f.offset);
}

std::vector<ConformanceVector> parse_vectors(std::string_view text) {
  std::vector<ConformanceVector> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& why) {
    throw Error("BadVectorFile", "line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string hex, expect;
    if (!(fields >> hex) || hex[0] == '#') continue;
    if (!(fields >> expect)) bad("missing expected outcome");
    ConformanceVector v;
    v.line = line_no;
    if (hex == "-") {
      v.bytes.clear();
    } else {
      auto bytes = from_hex(hex);
      if (!bytes) bad("bad hex '" + hex + "'");
      v.bytes = std::move(*bytes);
    }
    if (expect.rfind("ok:", 0) == 0) {
      if (expect.size() != 4) bad("bad ok outcome '" + expect + "'");
      auto s = from_wire_char(expect[3]);
      if (!s) bad("unknown sentiment in '" + expect + "'");
      v.expected = *s;
    } else {
      const auto at = expect.find('@');
      if (at == std::string::npos) bad("expected '<Error>@<offset>' or 'ok:<c>'");
      auto err = decode_error_from_string(std::string_view(expect).substr(0, at));
      if (!err) bad("unknown error class in '" + expect + "'");
      try {
        v.expected = DecodeFailure{*err, static_cast<std::size_t>(std::stoul(expect.substr(at + 1)))};
      } catch (const std::exception&) {
        bad("bad offset in '" + expect + "'");
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<ConformanceVector> load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("BadVectorFile", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_vectors(buf.str());
}

}  // namespace embodied::link
