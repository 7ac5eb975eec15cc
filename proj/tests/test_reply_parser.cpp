#include <doctest.h>

#include <random>

#include <json.hpp>

#include "embodied/reply_parser.hpp"

using namespace embodied;

TEST_CASE("well-formed reply parses strictly") {
  const auto r = parse_agent_reply(R"({"Response": "Hello there!", "Sentiment": "a"})");
  CHECK(r.text == "Hello there!");
  CHECK(r.sentiment == Sentiment::Greeting);
  CHECK_FALSE(r.repaired);
  CHECK(r.strategy == ParseStrategy::StrictJson);
  CHECK(r.raw == R"({"Response": "Hello there!", "Sentiment": "a"})");
}

TEST_CASE("format exactly as given in the pre-prompt") {
  const auto r = parse_agent_reply(R"({ "Response": "x", "Sentiment": "d"})");
  CHECK(r.text == "x");
  CHECK(r.sentiment == Sentiment::Serious);
  CHECK_FALSE(r.repaired);
}

TEST_CASE("plain text falls back to Serious") {
  const auto r = parse_agent_reply("Sure, happy to help!");
  CHECK(r.text == "Sure, happy to help!");
  CHECK(r.sentiment == Sentiment::Serious);
  CHECK(r.repaired);
  CHECK(r.strategy == ParseStrategy::Fallback);
}

TEST_CASE("fenced JSON is recovered by balanced-object extraction") {
  // Hand walk-through: the whole string starts with ``` so strict parsing
  // fails; the first '{' is at index 8 and its matching '}' closes the
  // object {"Response":"Hi","Sentiment":"b"}, which parses cleanly.
  const std::string raw = "```json\n{\"Response\":\"Hi\",\"Sentiment\":\"b\"}\n```";
  const auto r = parse_agent_reply(raw);
  CHECK(r.text == "Hi");
  CHECK(r.sentiment == Sentiment::Happy);
  CHECK(r.repaired);
  CHECK(r.strategy == ParseStrategy::EmbeddedObject);
}

TEST_CASE("prose around an object") {
  const auto r = parse_agent_reply(R"(Here you go: {"Response": "It is {tricky}", "Sentiment": "c"} thanks)");
  CHECK(r.text == "It is {tricky}");
  CHECK(r.sentiment == Sentiment::Sad);
  CHECK(r.repaired);
}

TEST_CASE("an earlier unrelated object is skipped") {
  const auto r = parse_agent_reply(R"({"note": 1} {"Response": "Second", "Sentiment": "e"})");
  CHECK(r.text == "Second");
  CHECK(r.sentiment == Sentiment::Dance);
}

TEST_CASE("truncated JSON is recovered by token scan") {
  const auto r = parse_agent_reply(R"({"Response": "Hi \"friend\"", "Sentiment": "c")");
  CHECK(r.strategy == ParseStrategy::TokenScan);
  CHECK(r.text == "Hi \"friend\"");
  CHECK(r.sentiment == Sentiment::Sad);
  CHECK(r.repaired);

  const auto only_sentiment = parse_agent_reply(R"(Let's dance! "Sentiment": "e")");
  CHECK(only_sentiment.sentiment == Sentiment::Dance);
  CHECK(only_sentiment.repaired);
}

TEST_CASE("out-of-range sentiment falls back to Serious") {
  const auto r = parse_agent_reply(R"({"Response": "Hmm", "Sentiment": "z"})");
  CHECK(r.text == "Hmm");
  CHECK(r.sentiment == Sentiment::Serious);
  CHECK(r.repaired);

  const auto missing = parse_agent_reply(R"({"Response": "No label"})");
  CHECK(missing.sentiment == Sentiment::Serious);
  CHECK(missing.repaired);

  const auto numeric = parse_agent_reply(R"({"Response": "Num", "Sentiment": 3})");
  CHECK(numeric.sentiment == Sentiment::Serious);
  CHECK(numeric.repaired);
}

TEST_CASE("lenient sentiment spellings are accepted but flagged") {
  CHECK(parse_agent_reply(R"({"Response": "a", "Sentiment": "B"})").sentiment == Sentiment::Happy);
  CHECK(parse_agent_reply(R"x({"Response": "a", "Sentiment": "b (happy)"})x").sentiment == Sentiment::Happy);
  const auto named = parse_agent_reply(R"({"Response": "a", "Sentiment": "dance"})");
  CHECK(named.sentiment == Sentiment::Dance);
  CHECK(named.repaired);
  const auto keycase = parse_agent_reply(R"({"response": "lower", "sentiment": "c"})");
  CHECK(keycase.text == "lower");
  CHECK(keycase.sentiment == Sentiment::Sad);
  CHECK(keycase.repaired);
}

TEST_CASE("round trip for every label with awkward text") {
  const std::vector<std::string> texts = {"", "plain", "quote \" and \\ backslash", "brace } { inside",
                                          "unicode caf\xc3\xa9 \xe2\x9c\x93", "new\nline"};
  for (Sentiment s : kAllSentiments) {
    for (const auto& t : texts) {
      const std::string raw =
          nlohmann::json{{"Response", t}, {"Sentiment", std::string(1, to_wire_char(s))}}.dump();
      const auto r = parse_agent_reply(raw);
      CHECK(r.sentiment == s);
      CHECK(r.text == t);
      CHECK_FALSE(r.repaired);
    }
  }
}

TEST_CASE("parser is total over random bytes") {
  std::mt19937_64 rng(99);
  const std::string alphabet = "{}\":,abcde Sentiment Response\\[]\n";
  for (int i = 0; i < 2000; ++i) {
    std::string s(rng() % 64, '\0');
    const bool structured = i % 2 == 0;
    for (auto& c : s) {
      c = structured ? alphabet[rng() % alphabet.size()] : static_cast<char>(rng() & 0xFF);
    }
    AgentReply r;
    CHECK_NOTHROW(r = parse_agent_reply(s));
    CHECK(static_cast<int>(r.sentiment) >= 0);
    CHECK(static_cast<int>(r.sentiment) < 5);
  }
}
