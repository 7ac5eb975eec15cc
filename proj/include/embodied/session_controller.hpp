#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "embodied/audio.hpp"
#include "embodied/broadcast.hpp"
#include "embodied/clients.hpp"
#include "embodied/dialog.hpp"
#include "embodied/pipeline.hpp"
#include "embodied/protocol.hpp"
#include "embodied/session_log.hpp"

namespace embodied {

/// Failure surfaced to service clients as {code, message, state}.
class ServiceError : public Error {
 public:
  ServiceError(std::string code, const std::string& message, int http_status, SessionState state)
      : Error(std::move(code), message), http_status_(http_status), state_(state) {}

  int http_status() const noexcept { return http_status_; }
  SessionState state() const noexcept { return state_; }

 private:
  int http_status_;
  SessionState state_;
};

/// Everything one session loop needs. Clients are owned; the device sender
/// may be shared with a telemetry driver.
struct SessionRuntime {
  std::unique_ptr<SttClient> stt;
  std::unique_ptr<LlmClient> llm;
  std::unique_ptr<TtsClient> tts;
  /// Opens a fresh audio source for each push-to-talk.
  std::function<std::unique_ptr<audio::AudioSource>()> open_source;
  std::unique_ptr<audio::AudioSink> sink;
  std::shared_ptr<link::DeviceSender> device;
  audio::EndpointerConfig endpointer{};
  VoiceProfile voice{};
  int brevity_limit = kDefaultBrevityLimit;
  std::size_t max_exchanges = kDefaultMaxExchanges;
  std::string preprompt{kCanonicalPreprompt};
  std::filesystem::path log_dir;  // empty: transcripts stay in memory
};

/// Event published on the /events stream. `body` always carries "seq" and
/// "type"; see SessionController for the types.
using ServiceEvent = nlohmann::json;

/// Owns the single active session and its loop.
///
/// push_to_talk() performs the ButtonPressed transition synchronously and
/// hands the rest of the turn (capture, pipeline, playback) to a worker
/// thread. Every transition is applied under one mutex and published in
/// that order. Published event types:
///   session  {session_id, action: started|stopped}
///   state    {from, to, event}
///   turn     {turn_index, user, agent, sentiment, repaired, strategy, word_count,
///             within_limit, device_ok, timings}
///   brevity  {turn_index, word_count, limit}          (only when over the limit)
///   error    {code, message}
class SessionController {
 public:
  explicit SessionController(SessionRuntime runtime);
  ~SessionController();
  SessionController(const SessionController&) = delete;
  SessionController& operator=(const SessionController&) = delete;

  /// Throws ServiceError SessionActive (409) if a session exists.
  std::string start_session();
  /// Ends the session. Throws ServiceError SessionBusy (409) mid-turn and
  /// NoSession (409) without one.
  void stop_session();

  /// Starts a session if none is active, then fires ButtonPressed.
  /// Throws ServiceError SessionBusy (409) unless the state is Idle.
  SessionState push_to_talk();

  SessionState state() const;
  std::optional<std::string> session_id() const;
  std::vector<SessionLogRecord> transcript() const;
  std::optional<ConversationHistory> history() const;
  std::optional<std::filesystem::path> log_path() const;
  std::uint64_t turns_completed() const;

  /// Blocks until `pred(state, turns_completed)` holds or the timeout passes.
  bool wait_for(const std::function<bool(SessionState, std::uint64_t)>& pred,
                std::chrono::milliseconds timeout) const;

  Broadcaster<ServiceEvent>& events() noexcept { return events_; }

 private:
  void worker();
  void run_one_turn();
  void start_locked();
  void apply_locked(SessionEvent event);
  void publish_locked(const std::string& type, nlohmann::json body);
  std::int64_t session_ms() const;

  SessionRuntime rt_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  SessionState state_ = SessionState::Idle;
  std::optional<ConversationHistory> history_;
  std::vector<SessionLogRecord> records_;
  std::unique_ptr<SessionLogWriter> log_;
  std::chrono::steady_clock::time_point session_start_;
  std::uint64_t seq_ = 0;
  std::uint64_t turns_completed_ = 0;
  bool capture_requested_ = false;
  bool stopping_ = false;
  Broadcaster<ServiceEvent> events_;
  std::thread worker_;
};

}  // namespace embodied
