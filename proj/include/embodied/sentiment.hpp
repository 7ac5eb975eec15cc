#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace embodied {

/// The five reply sentiments. Each one selects a gesture on the robot and
/// travels over the device link as a single ASCII character.
enum class Sentiment { Greeting, Happy, Sad, Serious, Dance };

inline constexpr std::array<Sentiment, 5> kAllSentiments{
    Sentiment::Greeting, Sentiment::Happy, Sentiment::Sad, Sentiment::Serious, Sentiment::Dance};

/// 'a'..'e'.
char to_wire_char(Sentiment s) noexcept;
std::optional<Sentiment> from_wire_char(char c) noexcept;

/// Lower-case name ("greeting", "happy", ...), used in files and JSON.
std::string_view to_name(Sentiment s) noexcept;
std::optional<Sentiment> from_name(std::string_view name) noexcept;

}  // namespace embodied
