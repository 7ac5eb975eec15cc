#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embodied/dialog.hpp"

namespace embodied {

/// One line of a session log: a Turn plus the metadata the console shows.
struct SessionLogRecord {
  std::string session_id;
  std::size_t turn_index = 0;
  Role role = Role::System;
  std::string text;
  std::optional<Sentiment> sentiment;
  std::int64_t timestamp_ms = 0;
  bool repaired = false;
  std::size_t word_count = 0;

  friend bool operator==(const SessionLogRecord&, const SessionLogRecord&) = default;
};

class CorruptLogLine : public Error {
 public:
  CorruptLogLine(std::size_t line_no, const std::string& why);
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

SessionLogRecord make_record(const ConversationHistory& history, std::size_t turn_index,
                             bool repaired = false);
std::vector<SessionLogRecord> to_records(const ConversationHistory& history);

/// Single-line JSON, no trailing newline. Invalid UTF-8 is replaced.
std::string to_line(const SessionLogRecord& record);
/// Throws CorruptLogLine(line_no).
SessionLogRecord from_line(std::string_view line, std::size_t line_no = 1);

/// Appends one record per line and flushes after each write.
class SessionLogWriter {
 public:
  explicit SessionLogWriter(const std::filesystem::path& path);
  void persist_turn(const SessionLogRecord& record);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::mutex mutex_;
  std::filesystem::path path_;
  std::ofstream out_;
};

void persist_turn(std::ostream& out, const SessionLogRecord& record);

/// Every record up to the first bad line. A truncated or malformed line
/// stops reading; the records before it remain usable.
struct LogReadResult {
  std::vector<SessionLogRecord> records;
  std::optional<CorruptLogLine> error;
};

LogReadResult read_log(std::istream& in);
LogReadResult read_log(const std::filesystem::path& path);

/// Rebuilds the history. Throws Error{"EmptyLog"} for a log without
/// records and CorruptLogLine for malformed lines or records that break
/// the history invariants.
ConversationHistory history_from_records(const std::vector<SessionLogRecord>& records);
ConversationHistory replay(std::istream& in);
ConversationHistory replay(const std::filesystem::path& path);

}  // namespace embodied
