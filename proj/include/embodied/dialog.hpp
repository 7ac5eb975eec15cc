#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embodied/error.hpp"
#include "embodied/sentiment.hpp"

namespace embodied {

/// Initial context given to the language model, verbatim. It names the
/// robot, asks for replies of at most 30 words, and fixes the JSON reply
/// format with its five sentiment characters.
extern const std::string_view kCanonicalPreprompt;

inline constexpr int kDefaultBrevityLimit = 30;
inline constexpr std::size_t kDefaultMaxExchanges = 100;

enum class Role { System, User, Agent };

std::string_view to_string(Role r) noexcept;
std::optional<Role> role_from_string(std::string_view s) noexcept;

struct Turn {
  Role role = Role::System;
  std::string text;
  std::optional<Sentiment> sentiment;  // set on Agent turns only
  std::int64_t timestamp_ms = 0;       // since session start

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct ConversationHistory {
  std::string session_id;
  std::vector<Turn> turns;

  std::size_t exchanges() const noexcept { return turns.empty() ? 0 : (turns.size() - 1) / 2; }

  friend bool operator==(const ConversationHistory&, const ConversationHistory&) = default;
};

/// Timestamps for the two turns of one exchange.
struct ExchangeTimes {
  std::int64_t user_ms = 0;
  std::int64_t agent_ms = 0;
};

/// Throws Error{"EmptyPreprompt"}.
ConversationHistory new_session(std::string_view preprompt);

/// Random 128-bit hex identifier.
std::string make_session_id();

/// Appends a User turn and an Agent turn. Prior turns are left untouched.
/// Throws Error{"HistoryFull"} once `max_exchanges` exchanges are stored.
void append_exchange(ConversationHistory& history, std::string user_text, std::string agent_text,
                     Sentiment sentiment, ExchangeTimes times = {},
                     std::size_t max_exchanges = kDefaultMaxExchanges);

/// Checks the structural invariants: one System turn at index 0, strict
/// User/Agent alternation afterwards, sentiment only on Agent turns.
/// Returns a description of the first violation, or nullopt.
std::optional<std::string> validate(const ConversationHistory& history);

// ---- session state machine ------------------------------------------------

enum class SessionState { Idle, Listening, Thinking, Speaking };
enum class SessionEvent { ButtonPressed, SilenceDetected, ReplyReady, PlaybackDone, Abort };

inline constexpr SessionState kAllStates[] = {SessionState::Idle, SessionState::Listening,
                                              SessionState::Thinking, SessionState::Speaking};
inline constexpr SessionEvent kAllEvents[] = {SessionEvent::ButtonPressed, SessionEvent::SilenceDetected,
                                              SessionEvent::ReplyReady, SessionEvent::PlaybackDone,
                                              SessionEvent::Abort};

std::string_view to_string(SessionState s) noexcept;
std::string_view to_string(SessionEvent e) noexcept;

class InvalidTransition : public Error {
 public:
  InvalidTransition(SessionState state, SessionEvent event);

  SessionState state() const noexcept { return state_; }
  SessionEvent event() const noexcept { return event_; }

 private:
  SessionState state_;
  SessionEvent event_;
};

/// Idle -ButtonPressed-> Listening -SilenceDetected-> Thinking -ReplyReady->
/// Speaking -PlaybackDone-> Idle; Abort returns to Idle from anywhere.
/// Any other pair throws InvalidTransition.
SessionState transition(SessionState state, SessionEvent event);

// ---- brevity --------------------------------------------------------------

struct BrevityReport {
  std::size_t word_count = 0;
  bool within_limit = true;
  int limit = kDefaultBrevityLimit;
};

/// Counts whitespace-delimited tokens. Never modifies the text.
BrevityReport enforce_brevity(std::string_view text, int limit = kDefaultBrevityLimit);

}  // namespace embodied
