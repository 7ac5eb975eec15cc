#include "embodied/reply_parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include <json.hpp>

namespace embodied {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct SentimentValue {
  Sentiment label;
  bool exact;  // the value was exactly one of "a".."e"
};

// Accepts the exact wire characters, and leniently "B", " b ", "b (happy)", "happy".
std::optional<SentimentValue> interpret_sentiment(std::string_view value) {
  if (value.size() == 1) {
    if (auto s = from_wire_char(value[0])) return SentimentValue{*s, true};
  }
  const std::string v = lower(trim(value));
  if (v.empty()) return std::nullopt;
  if (auto s = from_name(v)) return SentimentValue{*s, false};
  const bool single_token = v.size() == 1 || !std::isalpha(static_cast<unsigned char>(v[1]));
  if (single_token) {
    if (auto s = from_wire_char(v[0])) return SentimentValue{*s, false};
  }
  return std::nullopt;
}

const json* find_key(const json& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  if (it != obj.end()) return &*it;
  // Models occasionally change key case.
  for (auto kv = obj.begin(); kv != obj.end(); ++kv) {
    if (lower(kv.key()) == lower(key)) return &*kv;
  }
  return nullptr;
}

// nullopt when the object does not look like a reply at all.
std::optional<AgentReply> reply_from_object(const json& obj, std::string_view raw,
                                            ParseStrategy strategy) {
  if (!obj.is_object()) return std::nullopt;
  const json* response = find_key(obj, "Response");
  if (response == nullptr || !response->is_string()) return std::nullopt;

  AgentReply reply;
  reply.raw = std::string(raw);
  reply.text = response->get<std::string>();
  reply.strategy = strategy;
  reply.repaired = strategy != ParseStrategy::StrictJson;

  const json* sentiment = find_key(obj, "Sentiment");
  std::optional<SentimentValue> value;
  if (sentiment != nullptr && sentiment->is_string()) {
    value = interpret_sentiment(sentiment->get_ref<const std::string&>());
  }
  if (value) {
    reply.sentiment = value->label;
    if (!value->exact) reply.repaired = true;
  } else {
    reply.sentiment = kFallbackSentiment;
    reply.repaired = true;
  }
  if (obj.find("Response") == obj.end() || (sentiment != nullptr && obj.find("Sentiment") == obj.end())) {
    reply.repaired = true;
  }
  return reply;
}

std::optional<json> parse_json(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

// Every balanced {...} span, in order of their opening brace, skipping
// braces inside string literals.
std::optional<std::string_view> next_balanced_object(std::string_view text, std::size_t& from) {
  while (from < text.size()) {
    const std::size_t open = text.find('{', from);
    if (open == std::string_view::npos) {
      from = text.size();
      return std::nullopt;
    }
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        from = open + 1;
        return text.substr(open, i - open + 1);
      }
    }
    // Unbalanced from this brace; try the next one.
    from = open + 1;
  }
  return std::nullopt;
}

// Finds `"key" : "value"` and returns the decoded string value.
std::optional<std::string> scan_string_value(std::string_view text, std::string_view key) {
  const std::string lowered = lower(text);
  const std::string needle = "\"" + lower(key) + "\"";
  std::size_t pos = 0;
  while ((pos = lowered.find(needle, pos)) != std::string::npos) {
    std::size_t i = pos + needle.size();
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size() || text[i] != ':') {
      pos += needle.size();
      continue;
    }
    ++i;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size() || text[i] != '"') {
      pos += needle.size();
      continue;
    }
    const std::size_t start = i;
    bool escaped = false;
    for (++i; i < text.size(); ++i) {
      if (escaped) escaped = false;
      else if (text[i] == '\\') escaped = true;
      else if (text[i] == '"') break;
    }
    if (i >= text.size()) {
      // Unterminated: take the rest of the text as the value.
      return std::string(text.substr(start + 1));
    }
    const std::string_view literal = text.substr(start, i - start + 1);
    if (auto decoded = parse_json(literal); decoded && decoded->is_string()) {
      return decoded->get<std::string>();
    }
    return std::string(literal.substr(1, literal.size() - 2));
  }
  return std::nullopt;
}

std::string strip_scaffolding(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::string_view rest = raw;
  // Drop ``` fences together with an optional language tag on the same line.
  while (!rest.empty()) {
    const std::size_t fence = rest.find("```");
    if (fence == std::string_view::npos) {
      out.append(rest);
      break;
    }
    out.append(rest.substr(0, fence));
    rest.remove_prefix(fence + 3);
    std::size_t tag = 0;
    while (tag < rest.size() && std::isalnum(static_cast<unsigned char>(rest[tag]))) ++tag;
    rest.remove_prefix(tag);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](char c) { return c == '{' || c == '}'; }),
            out.end());
  return std::string(trim(out));
}

}  // namespace

std::string_view to_string(ParseStrategy s) noexcept {
  switch (s) {
    case ParseStrategy::StrictJson: return "strict";
    case ParseStrategy::EmbeddedObject: return "embedded";
    case ParseStrategy::TokenScan: return "scan";
    case ParseStrategy::Fallback: return "fallback";
  }
  return "?";
}

AgentReply parse_agent_reply(std::string_view raw) {
  try {
    if (auto whole = parse_json(raw)) {
      if (auto reply = reply_from_object(*whole, raw, ParseStrategy::StrictJson)) return *reply;
    }

    std::size_t cursor = 0;
    while (auto candidate = next_balanced_object(raw, cursor)) {
      if (auto obj = parse_json(*candidate)) {
        if (auto reply = reply_from_object(*obj, raw, ParseStrategy::EmbeddedObject)) return *reply;
      }
    }

    auto sentiment_value = scan_string_value(raw, "Sentiment");
    auto response_value = scan_string_value(raw, "Response");
    if (sentiment_value || response_value) {
      AgentReply reply;
      reply.raw = std::string(raw);
      reply.strategy = ParseStrategy::TokenScan;
      reply.repaired = true;
      std::optional<SentimentValue> value;
      if (sentiment_value) value = interpret_sentiment(*sentiment_value);
      reply.sentiment = value ? value->label : kFallbackSentiment;
      reply.text = response_value ? *response_value : strip_scaffolding(raw);
      return reply;
    }
  } catch (...) {
    // Fall through to the unconditional fallback below.
  }

  AgentReply reply;
  reply.raw = std::string(raw);
  reply.strategy = ParseStrategy::Fallback;
  reply.repaired = true;
  reply.sentiment = kFallbackSentiment;
  try {
    reply.text = strip_scaffolding(raw);
  } catch (...) {
    reply.text.clear();
  }
  return reply;
}

}  // namespace embodied
