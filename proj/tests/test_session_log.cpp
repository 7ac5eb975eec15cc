#include <doctest.h>

#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "embodied/session_log.hpp"

using namespace embodied;

namespace {

ConversationHistory seven_turns() {
  auto h = new_session(kCanonicalPreprompt);
  append_exchange(h, "hello there", "Hi! I'm Botson.", Sentiment::Greeting, {1000, 2500});
  append_exchange(h, "I feel sad today", "I'm sorry to hear that.", Sentiment::Sad, {9000, 10400});
  append_exchange(h, "can you dance?", "Watch this!", Sentiment::Dance, {15000, 16100});
  return h;
}

std::string serialize(const ConversationHistory& h) {
  std::ostringstream out;
  for (const auto& r : to_records(h)) persist_turn(out, r);
  return out.str();
}

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces{
      "a", "Z", " ", "\"", "\\", "\n", "\t", "{", "}", "é", "日本", "🤖", "\x01", "ok", ",", "\r\n"};
  std::string s;
  const auto n = rng() % 12;
  for (std::size_t i = 0; i < n; ++i) s += pieces[rng() % pieces.size()];
  return s;
}

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("a 7-turn history round trips") {
  const auto h = seven_turns();
  REQUIRE(h.turns.size() == 7);
  std::istringstream in(serialize(h));
  CHECK(replay(in) == h);
}

TEST_CASE("record line format") {
  const auto h = seven_turns();
  const auto r = make_record(h, 2, true);
  const auto line = to_line(r);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line.find("\"role\":\"agent\"") != std::string::npos);
  CHECK(line.find("\"sentiment\":\"a\"") != std::string::npos);
  CHECK(line.find("\"repaired\":true") != std::string::npos);
  CHECK(from_line(line) == r);
  CHECK(r.word_count == 3);

  const auto user = to_line(make_record(h, 1));
  CHECK(user.find("\"sentiment\":null") != std::string::npos);
}

TEST_CASE("a truncated last line is reported and prior records survive") {
  const auto text = serialize(seven_turns());
  const auto cut = text.substr(0, text.size() - 15);
  std::istringstream in(cut);
  const auto result = read_log(in);
  REQUIRE(result.error.has_value());
  CHECK(result.error->code() == "CorruptLogLine");
  CHECK(result.error->line_no() == 7);
  CHECK(result.records.size() == 6);

  std::istringstream again(cut);
  try {
    replay(again);
    FAIL("expected CorruptLogLine");
  } catch (const CorruptLogLine& e) {
    CHECK(e.line_no() == 7);
  }
}

TEST_CASE("a complete line missing its newline counts as truncated") {
  auto text = serialize(seven_turns());
  text.pop_back();
  std::istringstream in(text);
  const auto result = read_log(in);
  REQUIRE(result.error.has_value());
  CHECK(result.records.size() == 6);
}

TEST_CASE("empty log") {
  std::istringstream empty("");
  CHECK(code_of([&] { replay(empty); }) == "EmptyLog");
  std::istringstream blank("\n\n");
  CHECK(code_of([&] { replay(blank); }) == "EmptyLog");
}

TEST_CASE("malformed records are rejected with their line number") {
  const auto good = to_line(make_record(seven_turns(), 0));
  for (const std::string bad : {std::string("not json"), std::string("[1,2]"),
                                std::string(R"({"session_id":"x"})"),
                                std::string(R"({"session_id":"x","turn":0,"role":"robot","text":"","sentiment":null,"timestamp_ms":0,"repaired":false,"word_count":0})"),
                                std::string(R"({"session_id":"x","turn":0,"role":"agent","text":"","sentiment":"q","timestamp_ms":0,"repaired":false,"word_count":0})")}) {
    std::istringstream in(good + "\n" + bad + "\n");
    const auto result = read_log(in);
    REQUIRE(result.error.has_value());
    CHECK(result.error->line_no() == 2);
    CHECK(result.records.size() == 1);
  }
}

TEST_CASE("records that break the history shape are rejected") {
  const auto h = seven_turns();
  auto records = to_records(h);

  auto gap = records;
  gap.erase(gap.begin() + 3);
  CHECK(code_of([&] { history_from_records(gap); }) == "CorruptLogLine");

  auto mixed = records;
  mixed[4].session_id = "other";
  CHECK(code_of([&] { history_from_records(mixed); }) == "CorruptLogLine");

  auto dangling = records;
  dangling.pop_back();
  CHECK(code_of([&] { history_from_records(dangling); }) == "CorruptLogLine");

  CHECK(code_of([&] { history_from_records({}); }) == "EmptyLog");
}

TEST_CASE("invalid UTF-8 is replaced rather than producing a bad line") {
  auto h = new_session("sys");
  append_exchange(h, std::string("bad \xff byte"), "fine", Sentiment::Happy);
  const auto line = to_line(make_record(h, 1));
  const auto back = from_line(line);
  CHECK(back.text != "bad \xff byte");
  CHECK(back.text.find("bad ") == 0);
}

TEST_CASE("file writer appends and replays") {
  const auto path = std::filesystem::temp_directory_path() / "embodied_session_log_test.jsonl";
  std::filesystem::remove(path);
  const auto h = seven_turns();
  {
    SessionLogWriter w(path);
    for (const auto& r : to_records(h)) w.persist_turn(r);
  }
  CHECK(replay(path) == h);
  CHECK(read_log(path).records.size() == 7);
  std::filesystem::remove(path);
  CHECK(code_of([&] { replay(path); }) != "");
}

TEST_CASE("property: arbitrary valid histories round trip") {
  std::mt19937_64 rng(17);
  for (int n = 0; n < 100; ++n) {
    auto h = new_session("system " + random_text(rng));
    h.turns[0].timestamp_ms = static_cast<std::int64_t>(rng() % 1000);
    const auto exchanges = rng() % 8;
    std::int64_t t = 0;
    for (std::size_t i = 0; i < exchanges; ++i) {
      t += static_cast<std::int64_t>(rng() % 5000);
      const auto user_ms = t;
      t += static_cast<std::int64_t>(rng() % 5000);
      append_exchange(h, random_text(rng), random_text(rng), kAllSentiments[rng() % 5], {user_ms, t});
    }
    REQUIRE_FALSE(validate(h).has_value());
    std::istringstream in(serialize(h));
    CHECK(replay(in) == h);
  }
}
