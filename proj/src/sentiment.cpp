#include "embodied/sentiment.hpp"

namespace embodied {

namespace {
constexpr std::array<std::string_view, 5> kNames{"greeting", "happy", "sad", "serious", "dance"};
}

char to_wire_char(Sentiment s) noexcept {
  return static_cast<char>('a' + static_cast<int>(s));
}

std::optional<Sentiment> from_wire_char(char c) noexcept {
  if (c < 'a' || c > 'e') return std::nullopt;
  return static_cast<Sentiment>(c - 'a');
}

std::string_view to_name(Sentiment s) noexcept {
  return kNames[static_cast<std::size_t>(s)];
}

std::optional<Sentiment> from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Sentiment>(i);
  }
  return std::nullopt;
}

}  // namespace embodied
