#include <doctest.h>

#include "embodied/pipeline.hpp"
#include "embodied/virtual_device.hpp"

using namespace embodied;

namespace {

audio::AudioSegment utterance() { return audio::tone(0.5); }

class ThrowingSender : public link::DeviceSender {
 public:
  void send(std::span<const std::uint8_t>) override { throw Error("SerialError", "unplugged"); }
};

}  // namespace

TEST_CASE("build_messages maps roles in order") {
  auto h = new_session(kCanonicalPreprompt);
  auto fresh = build_messages(h);
  REQUIRE(fresh.size() == 1);
  CHECK(fresh[0] == ChatMessage{"system", std::string(kCanonicalPreprompt)});

  append_exchange(h, "what is five across", "Could you read me the clue?", Sentiment::Serious);
  auto msgs = build_messages(h);
  REQUIRE(msgs.size() == 3);
  CHECK(msgs[1] == ChatMessage{"user", "what is five across"});
  CHECK(msgs[2] == ChatMessage{"assistant", "Could you read me the clue?"});
}

TEST_CASE("run_turn with deterministic stubs") {
  StubStt stt({"what is five across"});
  StubLlm llm({R"({"Response": "Great question! Let's look at the clue.", "Sentiment": "b"})"});
  StubTts tts;
  link::RecordingSender device;
  auto h = new_session(kCanonicalPreprompt);

  std::int64_t clock = 0;
  TurnOptions opts;
  opts.session_clock = [&] { return clock += 10; };
  const auto out = run_turn(h, utterance(), Clients{stt, llm, tts}, device, opts);

  CHECK(h.turns.size() == 3);
  CHECK(h.turns[1].text == "what is five across");
  CHECK(h.turns[1].timestamp_ms == 10);
  CHECK(h.turns[2].text == "Great question! Let's look at the clue.");
  CHECK(h.turns[2].timestamp_ms == 20);
  CHECK(out.dispatched_sentiment == Sentiment::Happy);
  CHECK(out.agent.sentiment == out.dispatched_sentiment);
  CHECK(out.user == h.turns[1]);
  CHECK_FALSE(out.reply.repaired);
  CHECK(out.brevity.word_count == 7);
  CHECK(out.audio_out.samples.size() > 0);

  const auto frames = device.frames();
  REQUIRE(frames.size() == 1);
  CHECK(frames[0] == std::vector<std::uint8_t>{0x7E, 0x01, 0x01, 0x62, 0x62});

  const auto requests = llm.requests();
  REQUIRE(requests.size() == 1);
  REQUIRE(requests[0].size() == 2);
  CHECK(requests[0][0].role == "system");
  CHECK(requests[0][0].content == kCanonicalPreprompt);
  CHECK(requests[0][1] == ChatMessage{"user", "what is five across"});
}

TEST_CASE("second turn sends parsed text, not raw JSON") {
  StubStt stt({"hi", "and then?"});
  StubLlm llm({"```json\n{\"Response\":\"Hi\",\"Sentiment\":\"a\"}\n```", R"({"Response": "Then we continue.", "Sentiment": "d"})"});
  StubTts tts;
  link::RecordingSender device;
  auto h = new_session(kCanonicalPreprompt);
  run_turn(h, utterance(), Clients{stt, llm, tts}, device);
  run_turn(h, utterance(), Clients{stt, llm, tts}, device);
  const auto second = llm.requests().at(1);
  REQUIRE(second.size() == 4);
  CHECK(second[2] == ChatMessage{"assistant", "Hi"});
  CHECK(h.turns.size() == 5);
}

TEST_CASE("malformed completion still completes with the fallback label") {
  StubStt stt({"hello"});
  StubLlm llm({"I am not JSON at all"});
  StubTts tts;
  link::RecordingSender device;
  auto h = new_session(kCanonicalPreprompt);
  const auto out = run_turn(h, utterance(), Clients{stt, llm, tts}, device);
  CHECK(out.dispatched_sentiment == Sentiment::Serious);
  CHECK(out.reply.repaired);
  CHECK(h.turns.back().text == "I am not JSON at all");
  CHECK(device.frames().at(0)[3] == 'd');
}

TEST_CASE("client failures name the stage and leave history untouched") {
  StubStt stt({"hello"});
  StubLlm llm({R"({"Response": "ok", "Sentiment": "a"})"});
  StubTts tts;
  FailingStt bad_stt;
  FailingLlm bad_llm;
  FailingTts bad_tts;
  link::RecordingSender device;

  auto h = new_session(kCanonicalPreprompt);
  append_exchange(h, "earlier", "reply", Sentiment::Sad);
  const auto snapshot = h;

  auto expect_failure = [&](const Clients& clients, const char* code, Stage stage) {
    try {
      run_turn(h, utterance(), clients, device);
      FAIL("expected failure");
    } catch (const PipelineError& e) {
      CHECK(e.code() == code);
      CHECK(e.stage() == stage);
    }
    CHECK(h == snapshot);
  };
  expect_failure(Clients{bad_stt, llm, tts}, "SttUnavailable", Stage::Transcribe);
  expect_failure(Clients{stt, bad_llm, tts}, "LlmUnavailable", Stage::Complete);
  expect_failure(Clients{stt, llm, bad_tts}, "TtsUnavailable", Stage::Synthesize);
  CHECK(device.frames().empty());
}

TEST_CASE("device failure is reported without failing the turn") {
  StubStt stt({"hello"});
  StubLlm llm({R"({"Response": "ok", "Sentiment": "a"})"});
  StubTts tts;
  ThrowingSender device;
  auto h = new_session(kCanonicalPreprompt);
  const auto out = run_turn(h, utterance(), Clients{stt, llm, tts}, device);
  CHECK_FALSE(out.device_ok);
  CHECK(out.device_error == "unplugged");
  CHECK(h.turns.size() == 3);
}

TEST_CASE("sentiment reaches the virtual device before playback") {
  StubStt stt({"hello"});
  StubLlm llm({R"({"Response": "Let's dance!", "Sentiment": "e"})"});
  StubTts tts;
  std::int64_t now = 0;
  link::DeviceHandle device({}, [&] { return now; });
  auto h = new_session(kCanonicalPreprompt);
  run_turn(h, utterance(), Clients{stt, llm, tts}, device);
  now = 100;
  auto frames = device.step();
  REQUIRE_FALSE(frames.empty());
  CHECK(frames.back().active_gesture == Sentiment::Dance);
}

TEST_CASE("stub scripts") {
  ScriptedLines lines({"one", "two"});
  CHECK(lines.next() == "one");
  CHECK(lines.next() == "two");
  CHECK(lines.next() == "one");
  CHECK(lines.calls() == 3);
  CHECK_THROWS_AS(ScriptedLines({}), Error);
  CHECK_THROWS_AS(load_script("/nonexistent/script.txt"), Error);
}

TEST_CASE("stub TTS length follows the speaking rate") {
  StubTts tts;
  VoiceProfile v;
  v.words_per_minute = 120;
  const auto seg = tts.synthesize("one two three four", v);
  CHECK(seg.duration_s() == doctest::Approx(2.0).epsilon(0.001));
}

TEST_CASE("chat completion wire format") {
  const auto body = chat_request_json("gpt-4o", {{"system", "p"}, {"user", "hi"}});
  CHECK(body == R"({"messages":[{"content":"p","role":"system"},{"content":"hi","role":"user"}],"model":"gpt-4o"})");
  CHECK(chat_response_content(R"({"choices":[{"message":{"role":"assistant","content":"{\"Response\":\"x\"}"}}]})") ==
        R"({"Response":"x"})");
  CHECK_THROWS_AS(chat_response_content("nope"), ClientError);
  CHECK_THROWS_AS(chat_response_content(R"({"choices":[]})"), ClientError);
}
