#include "embodied/dialog.hpp"

#include <array>
#include <cstdio>
#include <random>
#include <sstream>

namespace embodied {

const std::string_view kCanonicalPreprompt =
    "Your name is Botson. You are the brains of a helpful assistant embodied into a robot. "
    "We are using speech-to-text, so there may be some errors. Do your best to mitigate, or ask "
    "for clarification. Keep your responses within 30 words. When you have more to say, share it "
    "over multiple responses in a conversational style. The response should include one text "
    "response. Each response must end with a single character that is most appropriate from this "
    "list: a (greeting), b (happy), c (sad), d (serious), e (dance). When responding, use the "
    "following JSON format, where x is the response, and y is the sentiment from the provided "
    "list: { \"Response\": \"x\", \"Sentiment\": \"y\"}";

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Agent: return "agent";
  }
  return "?";
}

std::optional<Role> role_from_string(std::string_view s) noexcept {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "agent") return Role::Agent;
  return std::nullopt;
}

std::string make_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::array<char, 33> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return std::string(buf.data(), 32);
}

ConversationHistory new_session(std::string_view preprompt) {
  if (preprompt.empty()) throw Error("EmptyPreprompt", "pre-prompt must not be empty");
  ConversationHistory h;
  h.session_id = make_session_id();
  h.turns.push_back(Turn{Role::System, std::string(preprompt), std::nullopt, 0});
  return h;
}

void append_exchange(ConversationHistory& history, std::string user_text, std::string agent_text,
                     Sentiment sentiment, ExchangeTimes times, std::size_t max_exchanges) {
  if (history.exchanges() >= max_exchanges) {
    throw Error("HistoryFull", "session reached the limit of " + std::to_string(max_exchanges) +
                                   " exchanges");
  }
  history.turns.reserve(history.turns.size() + 2);
  history.turns.push_back(Turn{Role::User, std::move(user_text), std::nullopt, times.user_ms});
  history.turns.push_back(Turn{Role::Agent, std::move(agent_text), sentiment, times.agent_ms});
}

std::optional<std::string> validate(const ConversationHistory& history) {
  const auto& t = history.turns;
  if (t.empty()) return "history is empty";
  if (t[0].role != Role::System) return "turn 0 is not the system pre-prompt";
  if (t[0].text.empty()) return "pre-prompt is empty";
  if (t.size() % 2 == 0) return "history ends with an unanswered user turn";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Role expected = i == 0 ? Role::System : (i % 2 == 1 ? Role::User : Role::Agent);
    if (t[i].role != expected) {
      return "turn " + std::to_string(i) + " has role " + std::string(to_string(t[i].role)) +
             ", expected " + std::string(to_string(expected));
    }
    if (t[i].sentiment.has_value() != (t[i].role == Role::Agent)) {
      return "turn " + std::to_string(i) + " sentiment does not match its role";
    }
  }
  return std::nullopt;
}

std::string_view to_string(SessionState s) noexcept {
  switch (s) {
    case SessionState::Idle: return "Idle";
    case SessionState::Listening: return "Listening";
    case SessionState::Thinking: return "Thinking";
    case SessionState::Speaking: return "Speaking";
  }
  return "?";
}

std::string_view to_string(SessionEvent e) noexcept {
  switch (e) {
    case SessionEvent::ButtonPressed: return "ButtonPressed";
    case SessionEvent::SilenceDetected: return "SilenceDetected";
    case SessionEvent::ReplyReady: return "ReplyReady";
    case SessionEvent::PlaybackDone: return "PlaybackDone";
    case SessionEvent::Abort: return "Abort";
  }
  return "?";
}

InvalidTransition::InvalidTransition(SessionState state, SessionEvent event)
    : Error("InvalidTransition", "event " + std::string(to_string(event)) + " is not valid in state " +
                                     std::string(to_string(state))),
      state_(state),
      event_(event) {}

SessionState transition(SessionState state, SessionEvent event) {
  using S = SessionState;
  using E = SessionEvent;
  if (event == E::Abort) return S::Idle;
  if (state == S::Idle && event == E::ButtonPressed) return S::Listening;
  if (state == S::Listening && event == E::SilenceDetected) return S::Thinking;
  if (state == S::Thinking && event == E::ReplyReady) return S::Speaking;
  if (state == S::Speaking && event == E::PlaybackDone) return S::Idle;
  throw InvalidTransition(state, event);
}

BrevityReport enforce_brevity(std::string_view text, int limit) {
  std::size_t words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return BrevityReport{words, words <= static_cast<std::size_t>(limit < 0 ? 0 : limit), limit};
}

}  // namespace embodied
