#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "embodied/error.hpp"
#include "embodied/sentiment.hpp"

namespace embodied::link {

// Frame layout, 5 bytes:
//   [0] 0x7E sync
//   [1] 0x01 version
//   [2] 0x01 payload length
//   [3] sentiment character 'a'..'e'
//   [4] XOR of bytes 1..3
inline constexpr std::uint8_t kSync = 0x7E;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::uint8_t kPayloadLen = 0x01;
inline constexpr std::size_t kFrameSize = 5;

inline constexpr int kDefaultBaud = 115200;

using Frame = std::array<std::uint8_t, kFrameSize>;

enum class DecodeError { Truncated, BadSync, BadVersion, BadLength, BadChecksum, UnknownSentiment };

std::string_view to_string(DecodeError e) noexcept;
std::optional<DecodeError> decode_error_from_string(std::string_view s) noexcept;

struct DecodeFailure {
  DecodeError error;
  std::size_t offset;  // index of the offending byte

  friend bool operator==(const DecodeFailure&, const DecodeFailure&) = default;
};

using DecodeResult = std::variant<Sentiment, DecodeFailure>;

class ProtocolError : public Error {
 public:
  explicit ProtocolError(DecodeFailure failure);
  const DecodeFailure& failure() const noexcept { return failure_; }

 private:
  DecodeFailure failure_;
};

std::uint8_t checksum(std::uint8_t version, std::uint8_t length, std::uint8_t payload) noexcept;

Frame encode_command(Sentiment s) noexcept;

/// Validates a single frame, checking in order: length, sync, version,
/// length field, checksum, payload range. Never throws.
DecodeResult try_decode(std::span<const std::uint8_t> bytes) noexcept;

/// Same as try_decode but throws ProtocolError.
Sentiment decode_command(std::span<const std::uint8_t> bytes);

/// Byte-at-a-time parser for a continuous stream. Hunts for the sync byte,
/// collects a frame, and after any rejected frame resumes the hunt from the
/// byte after the rejected sync.
class StreamParser {
 public:
  /// Feeds one byte. Returns every frame that completed or failed on it
  /// (more than one only when a resync replays buffered bytes).
  std::vector<DecodeResult> push(std::uint8_t byte);

  std::vector<DecodeResult> push(std::span<const std::uint8_t> bytes);

  /// Bytes skipped while hunting for sync.
  std::size_t skipped() const noexcept { return skipped_; }
  bool mid_frame() const noexcept { return !buf_.empty(); }

 private:
  void feed(std::uint8_t byte, std::vector<DecodeResult>& out);

  std::vector<std::uint8_t> buf_;
  std::size_t skipped_ = 0;
};

// ---- conformance vectors --------------------------------------------------
//
// One vector per line: hex bytes, whitespace, expected outcome.
//   7e01016262   ok:b
//   7e0101       Truncated@3
// Blank lines and lines starting with '#' are ignored.

struct ConformanceVector {
  std::vector<std::uint8_t> bytes;
  DecodeResult expected;
  std::size_t line = 0;
};

std::vector<ConformanceVector> parse_vectors(std::string_view text);
std::vector<ConformanceVector> load_vectors(const std::filesystem::path& path);

std::string format_result(const DecodeResult& r);
std::string to_hex(std::span<const std::uint8_t> bytes);
std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex);

/// Host side of the link: something that accepts encoded commands.
class DeviceSender {
 public:
  virtual ~DeviceSender() = default;
  virtual void send(std::span<const std::uint8_t> bytes) = 0;
};

}  // namespace embodied::link
