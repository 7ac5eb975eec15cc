#include "embodied/pipeline.hpp"

namespace embodied {

namespace {

using SteadyClock = std::chrono::steady_clock;

double elapsed_ms(SteadyClock::time_point since) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - since).count();
}

std::string_view chat_role(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Agent: return "assistant";
  }
  return "user";
}

std::string error_code(Stage s) {
  switch (s) {
    case Stage::Transcribe: return "SttUnavailable";
    case Stage::Complete: return "LlmUnavailable";
    case Stage::Synthesize: return "TtsUnavailable";
  }
  return "PipelineError";
}

template <typename F>
auto guarded(Stage stage, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

}  // namespace

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Transcribe: return "transcribe";
    case Stage::Complete: return "complete";
    case Stage::Synthesize: return "synthesize";
  }
  return "?";
}

PipelineError::PipelineError(Stage stage, const std::string& cause)
    : Error(error_code(stage), std::string(to_string(stage)) + " failed: " + cause), stage_(stage) {}

std::vector<ChatMessage> build_messages(const ConversationHistory& history) {
  std::vector<ChatMessage> out;
  out.reserve(history.turns.size() + 1);
  for (const auto& t : history.turns) out.push_back({std::string(chat_role(t.role)), t.text});
  return out;
}

TurnOutcome run_turn(ConversationHistory& history, const audio::AudioSegment& audio_in,
                     const Clients& clients, link::DeviceSender& device, const TurnOptions& options) {
  if (history.exchanges() >= options.max_exchanges) {
    throw Error("HistoryFull", "session reached the limit of " + std::to_string(options.max_exchanges) +
                                   " exchanges");
  }
  TurnOutcome out;

  auto t0 = SteadyClock::now();
  std::string transcript = guarded(Stage::Transcribe, [&] { return clients.stt.transcribe(audio_in); });
  out.timings.transcribe_ms = elapsed_ms(t0);
  const std::int64_t user_ms = options.session_clock();

  auto messages = build_messages(history);
  messages.push_back({"user", transcript});
  t0 = SteadyClock::now();
  std::string raw = guarded(Stage::Complete, [&] { return clients.llm.complete(messages); });
  out.timings.complete_ms = elapsed_ms(t0);

  t0 = SteadyClock::now();
  out.reply = parse_agent_reply(raw);
  out.brevity = enforce_brevity(out.reply.text, options.brevity_limit);
  out.timings.parse_ms = elapsed_ms(t0);

  t0 = SteadyClock::now();
  out.audio_out = guarded(Stage::Synthesize,
                          [&] { return clients.tts.synthesize(out.reply.text, options.voice); });
  out.timings.synthesize_ms = elapsed_ms(t0);
  const std::int64_t agent_ms = options.session_clock();

  // Commit only after every client call succeeded.
  append_exchange(history, std::move(transcript), out.reply.text, out.reply.sentiment, {user_ms, agent_ms},
                  options.max_exchanges);
  out.user = history.turns[history.turns.size() - 2];
  out.agent = history.turns.back();
  out.dispatched_sentiment = out.reply.sentiment;

  const auto frame = link::encode_command(out.dispatched_sentiment);
  try {
    device.send(frame);
  } catch (const std::exception& e) {
    out.device_ok = false;
    out.device_error = e.what();
  }
  return out;
}

}  // namespace embodied
