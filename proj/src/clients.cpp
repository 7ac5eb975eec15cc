#include <algorithm>
#include <fstream>

#include "embodied/clients.hpp"
#include "embodied/dialog.hpp"

namespace embodied {

ScriptedLines::ScriptedLines(std::vector<std::string> lines) : lines_(std::move(lines)) {
  if (lines_.empty()) throw Error("BadScript", "script has no lines");
}

std::string ScriptedLines::next() {
  std::lock_guard lock(mutex_);
  return lines_[next_++ % lines_.size()];
}

std::size_t ScriptedLines::calls() const {
  std::lock_guard lock(mutex_);
  return next_;
}

std::vector<std::string> load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("BadScript", "cannot open script " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw Error("BadScript", "script " + path.string() + " is empty");
  return lines;
}

std::string StubStt::transcribe(const audio::AudioSegment&) { return script_.next(); }

std::string StubLlm::complete(const std::vector<ChatMessage>& messages) {
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(messages);
  }
  return script_.next();
}

std::vector<std::vector<ChatMessage>> StubLlm::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

audio::AudioSegment StubTts::synthesize(const std::string& text, const VoiceProfile& voice) {
  const auto words = enforce_brevity(text).word_count;
  const double wpm = std::max(voice.words_per_minute, 1);
  const double seconds = std::max(0.2, static_cast<double>(words) * 60.0 / wpm);
  return audio::tone(seconds, 0.1, 110.0 + voice.pitch);
}

}  // namespace embodied
