#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "embodied/audio.hpp"
#include "embodied/clients.hpp"
#include "embodied/dialog.hpp"
#include "embodied/protocol.hpp"
#include "embodied/reply_parser.hpp"

namespace embodied {

/// Which stage of a turn failed.
enum class Stage { Transcribe, Complete, Synthesize };

std::string_view to_string(Stage s) noexcept;

/// Thrown by run_turn; code() is SttUnavailable, LlmUnavailable or
/// TtsUnavailable. The history passed in is left unchanged.
class PipelineError : public Error {
 public:
  PipelineError(Stage stage, const std::string& cause);
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct Clients {
  SttClient& stt;
  LlmClient& llm;
  TtsClient& tts;
};

struct StageTimings {
  double transcribe_ms = 0;
  double complete_ms = 0;
  double parse_ms = 0;
  double synthesize_ms = 0;
};

struct TurnOutcome {
  Turn user;
  Turn agent;
  AgentReply reply;
  BrevityReport brevity;
  audio::AudioSegment audio_out;
  Sentiment dispatched_sentiment = Sentiment::Serious;
  bool device_ok = true;
  std::string device_error;
  StageTimings timings;
};

struct TurnOptions {
  VoiceProfile voice{};
  int brevity_limit = kDefaultBrevityLimit;
  std::size_t max_exchanges = kDefaultMaxExchanges;
  /// Milliseconds since session start, used to stamp the new turns.
  std::function<std::int64_t()> session_clock = [] { return std::int64_t{0}; };
};

/// One chat message per turn, in order. Agent turns contribute only their
/// parsed text; the raw JSON reply and the sentiment are not sent back.
std::vector<ChatMessage> build_messages(const ConversationHistory& history);

/// Transcribes `audio_in`, completes against the history plus the new user
/// message, parses the reply and synthesizes speech. On success appends the
/// exchange to `history` and sends the sentiment command to the device
/// before returning the audio to play. A failed device send is reported in
/// the outcome and does not fail the turn.
TurnOutcome run_turn(ConversationHistory& history, const audio::AudioSegment& audio_in,
                     const Clients& clients, link::DeviceSender& device, const TurnOptions& options = {});

}  // namespace embodied
