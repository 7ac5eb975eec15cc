#pragma once

#include <string>
#include <string_view>

#include "embodied/sentiment.hpp"

namespace embodied {

/// Label used when a reply carries no usable sentiment. Serious maps to the
/// calm, upright stance.
inline constexpr Sentiment kFallbackSentiment = Sentiment::Serious;

/// Which step of the repair chain produced the reply.
enum class ParseStrategy { StrictJson, EmbeddedObject, TokenScan, Fallback };

std::string_view to_string(ParseStrategy s) noexcept;

struct AgentReply {
  std::string raw;
  std::string text;
  Sentiment sentiment = kFallbackSentiment;
  bool repaired = false;
  ParseStrategy strategy = ParseStrategy::StrictJson;
};

/// Total: never throws, always yields one of the five labels.
///
/// Tries, in order: the whole string as a JSON object; the first balanced
/// {...} substring; a token scan for the "Sentiment"/"Response" values; and
/// finally the raw text with code fences and braces stripped, labelled
/// kFallbackSentiment. A sentiment outside a..e also maps to the fallback
/// label. `repaired` is set whenever anything other than a clean strict
/// parse was needed.
AgentReply parse_agent_reply(std::string_view raw);

}  // namespace embodied
