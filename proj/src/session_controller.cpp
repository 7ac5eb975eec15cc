#include "embodied/session_controller.hpp"

namespace embodied {

namespace {
using nlohmann::json;

json sentiment_json(const std::optional<Sentiment>& s) {
  return s ? json(std::string(1, to_wire_char(*s))) : json(nullptr);
}
}  // namespace

SessionController::SessionController(SessionRuntime runtime) : rt_(std::move(runtime)) {
  if (!rt_.stt || !rt_.llm || !rt_.tts || !rt_.open_source || !rt_.sink || !rt_.device) {
    throw std::invalid_argument("session runtime is missing a component");
  }
  rt_.endpointer.validate();
  worker_ = std::thread([this] { worker(); });
}

SessionController::~SessionController() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  changed_.notify_all();
  if (worker_.joinable()) worker_.join();
  events_.close_all();
}

std::int64_t SessionController::session_ms() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                               session_start_)
      .count();
}

void SessionController::publish_locked(const std::string& type, json body) {
  body["seq"] = ++seq_;
  body["type"] = type;
  if (history_) body["session_id"] = history_->session_id;
  events_.publish(body);
}

void SessionController::apply_locked(SessionEvent event) {
  const SessionState from = state_;
  state_ = transition(state_, event);
  publish_locked("state", {{"from", to_string(from)}, {"to", to_string(state_)}, {"event", to_string(event)}});
  changed_.notify_all();
}

void SessionController::start_locked() {
  history_ = new_session(rt_.preprompt);
  session_start_ = std::chrono::steady_clock::now();
  records_.clear();
  log_.reset();
  if (!rt_.log_dir.empty()) {
    std::filesystem::create_directories(rt_.log_dir);
    log_ = std::make_unique<SessionLogWriter>(rt_.log_dir / (history_->session_id + ".jsonl"));
  }
  records_.push_back(make_record(*history_, 0));
  if (log_) log_->persist_turn(records_.back());
  state_ = SessionState::Idle;
  publish_locked("session", {{"action", "started"}});
  changed_.notify_all();
}

std::string SessionController::start_session() {
  std::lock_guard lock(mutex_);
  if (history_) {
    throw ServiceError("SessionActive", "a session is already active", 409, state_);
  }
  start_locked();
  return history_->session_id;
}

void SessionController::stop_session() {
  std::lock_guard lock(mutex_);
  if (!history_) throw ServiceError("NoSession", "no active session", 409, state_);
  if (state_ != SessionState::Idle || capture_requested_) {
    throw ServiceError("SessionBusy", "cannot stop a session mid-turn", 409, state_);
  }
  publish_locked("session", {{"action", "stopped"}});
  history_.reset();
  log_.reset();
  changed_.notify_all();
}

SessionState SessionController::push_to_talk() {
  std::lock_guard lock(mutex_);
  if (!history_) start_locked();
  if (state_ != SessionState::Idle) {
    throw ServiceError("SessionBusy", "push-to-talk is only accepted while Idle", 409, state_);
  }
  apply_locked(SessionEvent::ButtonPressed);
  capture_requested_ = true;
  changed_.notify_all();
  return state_;
}

SessionState SessionController::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::optional<std::string> SessionController::session_id() const {
  std::lock_guard lock(mutex_);
  if (!history_) return std::nullopt;
  return history_->session_id;
}

std::vector<SessionLogRecord> SessionController::transcript() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::optional<ConversationHistory> SessionController::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

std::optional<std::filesystem::path> SessionController::log_path() const {
  std::lock_guard lock(mutex_);
  if (!log_) return std::nullopt;
  return log_->path();
}

std::uint64_t SessionController::turns_completed() const {
  std::lock_guard lock(mutex_);
  return turns_completed_;
}

bool SessionController::wait_for(const std::function<bool(SessionState, std::uint64_t)>& pred,
                                 std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return changed_.wait_for(lock, timeout, [&] { return pred(state_, turns_completed_); });
}

void SessionController::worker() {
  while (true) {
    {
      std::unique_lock lock(mutex_);
      changed_.wait(lock, [&] { return capture_requested_ || stopping_; });
      if (stopping_) return;
      capture_requested_ = false;
    }
    run_one_turn();
  }
}

void SessionController::run_one_turn() {
  try {
    auto source = rt_.open_source();
    const audio::AudioSegment utterance = audio::capture_until_silence(*source, rt_.endpointer);

    ConversationHistory working;
    {
      std::lock_guard lock(mutex_);
      apply_locked(SessionEvent::SilenceDetected);
      working = *history_;
    }

    TurnOptions options;
    options.voice = rt_.voice;
    options.brevity_limit = rt_.brevity_limit;
    options.max_exchanges = rt_.max_exchanges;
    options.session_clock = [this] { return session_ms(); };
    const TurnOutcome outcome =
        run_turn(working, utterance, Clients{*rt_.stt, *rt_.llm, *rt_.tts}, *rt_.device, options);

    {
      std::lock_guard lock(mutex_);
      history_ = std::move(working);
      const std::size_t agent_index = history_->turns.size() - 1;
      records_.push_back(make_record(*history_, agent_index - 1));
      records_.push_back(make_record(*history_, agent_index, outcome.reply.repaired));
      if (log_) {
        log_->persist_turn(records_[records_.size() - 2]);
        log_->persist_turn(records_.back());
      }
      ++turns_completed_;
      publish_locked("turn", {{"turn_index", agent_index},
                              {"user", outcome.user.text},
                              {"agent", outcome.agent.text},
                              {"sentiment", sentiment_json(outcome.dispatched_sentiment)},
                              {"repaired", outcome.reply.repaired},
                              {"strategy", to_string(outcome.reply.strategy)},
                              {"word_count", outcome.brevity.word_count},
                              {"within_limit", outcome.brevity.within_limit},
                              {"device_ok", outcome.device_ok},
                              {"timings",
                               {{"transcribe_ms", outcome.timings.transcribe_ms},
                                {"complete_ms", outcome.timings.complete_ms},
                                {"parse_ms", outcome.timings.parse_ms},
                                {"synthesize_ms", outcome.timings.synthesize_ms}}}});
      if (!outcome.brevity.within_limit) {
        publish_locked("brevity", {{"turn_index", agent_index},
                                   {"word_count", outcome.brevity.word_count},
                                   {"limit", outcome.brevity.limit}});
      }
      if (!outcome.device_ok) {
        publish_locked("error", {{"code", "DeviceUnavailable"}, {"message", outcome.device_error}});
      }
      apply_locked(SessionEvent::ReplyReady);
    }

    rt_.sink->play(outcome.audio_out);

    std::lock_guard lock(mutex_);
    apply_locked(SessionEvent::PlaybackDone);
  } catch (const std::exception& e) {
    std::lock_guard lock(mutex_);
    const auto* err = dynamic_cast<const Error*>(&e);
    publish_locked("error", {{"code", err ? err->code() : std::string("InternalError")}, {"message", e.what()}});
    apply_locked(SessionEvent::Abort);
  }
}

}  // namespace embodied
