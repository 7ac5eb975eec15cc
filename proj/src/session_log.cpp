#include "embodied/session_log.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace embodied {

namespace {
using nlohmann::json;
}

CorruptLogLine::CorruptLogLine(std::size_t line_no, const std::string& why)
    : Error("CorruptLogLine", "log line " + std::to_string(line_no) + ": " + why), line_no_(line_no) {}

SessionLogRecord make_record(const ConversationHistory& history, std::size_t turn_index, bool repaired) {
  const Turn& t = history.turns.at(turn_index);
  SessionLogRecord r;
  r.session_id = history.session_id;
  r.turn_index = turn_index;
  r.role = t.role;
  r.text = t.text;
  r.sentiment = t.sentiment;
  r.timestamp_ms = t.timestamp_ms;
  r.repaired = repaired;
  r.word_count = enforce_brevity(t.text).word_count;
  return r;
}

std::vector<SessionLogRecord> to_records(const ConversationHistory& history) {
  std::vector<SessionLogRecord> out;
  out.reserve(history.turns.size());
  for (std::size_t i = 0; i < history.turns.size(); ++i) out.push_back(make_record(history, i));
  return out;
}

std::string to_line(const SessionLogRecord& r) {
  json j;
  j["session_id"] = r.session_id;
  j["turn"] = r.turn_index;
  j["role"] = std::string(to_string(r.role));
  j["text"] = r.text;
  j["sentiment"] = r.sentiment ? json(std::string(1, to_wire_char(*r.sentiment))) : json(nullptr);
  j["timestamp_ms"] = r.timestamp_ms;
  j["repaired"] = r.repaired;
  j["word_count"] = r.word_count;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

SessionLogRecord from_line(std::string_view line, std::size_t line_no) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) throw CorruptLogLine(line_no, "not valid JSON");
  if (!j.is_object()) throw CorruptLogLine(line_no, "record is not an object");
  try {
    SessionLogRecord r;
    r.session_id = j.at("session_id").get<std::string>();
    r.turn_index = j.at("turn").get<std::size_t>();
    auto role = role_from_string(j.at("role").get<std::string>());
    if (!role) throw CorruptLogLine(line_no, "unknown role");
    r.role = *role;
    r.text = j.at("text").get<std::string>();
    const json& s = j.at("sentiment");
    if (!s.is_null()) {
      const auto str = s.get<std::string>();
      auto label = str.size() == 1 ? from_wire_char(str[0]) : std::nullopt;
      if (!label) throw CorruptLogLine(line_no, "bad sentiment '" + str + "'");
      r.sentiment = label;
    }
    r.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    r.repaired = j.at("repaired").get<bool>();
    r.word_count = j.at("word_count").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw CorruptLogLine(line_no, e.what());
  }
}

void persist_turn(std::ostream& out, const SessionLogRecord& record) {
  out << to_line(record) << '\n';
  out.flush();
}

SessionLogWriter::SessionLogWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::app | std::ios::binary) {
  if (!out_) throw Error("LogOpenFailed", "cannot open session log " + path.string());
}

void SessionLogWriter::persist_turn(const SessionLogRecord& record) {
  std::lock_guard lock(mutex_);
  embodied::persist_turn(out_, record);
  if (!out_) throw Error("LogWriteFailed", "cannot append to " + path_.string());
}

LogReadResult read_log(std::istream& in) {
  LogReadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (true) {
    if (!std::getline(in, line)) break;
    ++line_no;
    const bool terminated = !in.eof();
    if (line.empty()) {
      if (terminated) continue;
      break;
    }
    if (!terminated) {
      // A final line without '\n' is an interrupted append.
      result.error = CorruptLogLine(line_no, "truncated record (no line terminator)");
      break;
    }
    try {
      result.records.push_back(from_line(line, line_no));
    } catch (const CorruptLogLine& e) {
      result.error = e;
      break;
    }
  }
  return result;
}

LogReadResult read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("LogOpenFailed", "cannot open session log " + path.string());
  return read_log(in);
}

ConversationHistory history_from_records(const std::vector<SessionLogRecord>& records) {
  if (records.empty()) throw Error("EmptyLog", "session log has no records");
  ConversationHistory h;
  h.session_id = records.front().session_id;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::size_t line_no = i + 1;
    if (r.session_id != h.session_id) throw CorruptLogLine(line_no, "session id changes mid-log");
    if (r.turn_index != i) throw CorruptLogLine(line_no, "turn index out of sequence");
    h.turns.push_back(Turn{r.role, r.text, r.sentiment, r.timestamp_ms});
    const Role expected = i == 0 ? Role::System : (i % 2 == 1 ? Role::User : Role::Agent);
    if (r.role != expected) throw CorruptLogLine(line_no, "unexpected role");
    if (r.sentiment.has_value() != (r.role == Role::Agent)) {
      throw CorruptLogLine(line_no, "sentiment does not match role");
    }
  }
  if (records.size() % 2 == 0) throw CorruptLogLine(records.size(), "user turn without an agent reply");
  return h;
}

ConversationHistory replay(std::istream& in) {
  auto result = read_log(in);
  if (result.error) throw *result.error;
  return history_from_records(result.records);
}

ConversationHistory replay(const std::filesystem::path& path) {
  auto result = read_log(path);
  if (result.error) throw *result.error;
  return history_from_records(result.records);
}

}  // namespace embodied
