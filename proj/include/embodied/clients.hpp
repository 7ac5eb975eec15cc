#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "embodied/audio.hpp"
#include "embodied/error.hpp"

namespace embodied {

/// Raised by client adapters when the backing service cannot be used.
class ClientError : public Error {
 public:
  explicit ClientError(const std::string& message) : Error("ClientError", message) {}
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Voice used for speech output. The defaults give a flat, clearly
/// synthetic voice.
struct VoiceProfile {
  std::string voice = "en+m3";
  int words_per_minute = 150;
  int pitch = 35;        // 0..99
};

class SttClient {
 public:
  virtual ~SttClient() = default;
  virtual std::string transcribe(const audio::AudioSegment& audio) = 0;
  virtual std::string name() const = 0;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
  virtual std::string name() const = 0;
};

class TtsClient {
 public:
  virtual ~TtsClient() = default;
  virtual audio::AudioSegment synthesize(const std::string& text, const VoiceProfile& voice) = 0;
  virtual std::string name() const = 0;
};

/// Plays back a fixed script line by line, wrapping around at the end.
class ScriptedLines {
 public:
  explicit ScriptedLines(std::vector<std::string> lines);
  std::string next();
  std::size_t calls() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> lines_;
  std::size_t next_ = 0;
};

/// Reads a script file: one entry per line, blank lines ignored.
/// Throws Error{"BadScript"} if the file is missing or empty.
std::vector<std::string> load_script(const std::filesystem::path& path);

class StubStt : public SttClient {
 public:
  explicit StubStt(std::vector<std::string> transcripts) : script_(std::move(transcripts)) {}
  std::string transcribe(const audio::AudioSegment& audio) override;
  std::string name() const override { return "stub"; }
  std::size_t calls() const { return script_.calls(); }

 private:
  ScriptedLines script_;
};

/// Returns scripted raw completions and records every request it saw.
class StubLlm : public LlmClient {
 public:
  explicit StubLlm(std::vector<std::string> replies) : script_(std::move(replies)) {}
  std::string complete(const std::vector<ChatMessage>& messages) override;
  std::string name() const override { return "stub"; }
  std::vector<std::vector<ChatMessage>> requests() const;

 private:
  ScriptedLines script_;
  mutable std::mutex mutex_;
  std::vector<std::vector<ChatMessage>> requests_;
};

/// Produces a quiet tone whose length follows the word count and speaking
/// rate, so playback timing behaves like real speech.
class StubTts : public TtsClient {
 public:
  audio::AudioSegment synthesize(const std::string& text, const VoiceProfile& voice) override;
  std::string name() const override { return "stub"; }
};

/// Always throws ClientError; for exercising failure paths.
class FailingStt : public SttClient {
 public:
  std::string transcribe(const audio::AudioSegment&) override { throw ClientError("stt offline"); }
  std::string name() const override { return "failing"; }
};
class FailingLlm : public LlmClient {
 public:
  std::string complete(const std::vector<ChatMessage>&) override { throw ClientError("llm offline"); }
  std::string name() const override { return "failing"; }
};
class FailingTts : public TtsClient {
 public:
  audio::AudioSegment synthesize(const std::string&, const VoiceProfile&) override {
    throw ClientError("tts offline");
  }
  std::string name() const override { return "failing"; }
};

// ---- live adapters --------------------------------------------------------
//
// Thin HTTP/process bindings selected by configuration. Endpoints and keys
// come from the environment:
//   EMBODIED_LLM_URL      base URL of an OpenAI-compatible API (default https://api.openai.com)
//   EMBODIED_LLM_API_KEY  bearer token for chat completions
//   EMBODIED_STT_URL      base URL for /v1/audio/transcriptions (defaults to EMBODIED_LLM_URL)
//   EMBODIED_STT_API_KEY  bearer token for transcription (defaults to EMBODIED_LLM_API_KEY)

struct LiveEndpoint {
  std::string base_url;
  std::string api_key;
  std::string model;
};

/// Resolves an endpoint from the environment; throws Error{"MissingCredentials"}.
LiveEndpoint llm_endpoint_from_env(std::string model);
LiveEndpoint stt_endpoint_from_env(std::string model);

class HttpLlm : public LlmClient {
 public:
  explicit HttpLlm(LiveEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string complete(const std::vector<ChatMessage>& messages) override;
  std::string name() const override { return "live:" + endpoint_.model; }

 private:
  LiveEndpoint endpoint_;
};

class HttpStt : public SttClient {
 public:
  explicit HttpStt(LiveEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string transcribe(const audio::AudioSegment& audio) override;
  std::string name() const override { return "live:" + endpoint_.model; }

 private:
  LiveEndpoint endpoint_;
};

/// Runs the eSpeak command line synthesizer and reads its WAV output.
class EspeakTts : public TtsClient {
 public:
  explicit EspeakTts(std::string executable = "espeak") : executable_(std::move(executable)) {}
  audio::AudioSegment synthesize(const std::string& text, const VoiceProfile& voice) override;
  std::string name() const override { return "live:" + executable_; }

 private:
  std::string executable_;
};

/// Request body for an OpenAI-style chat completion.
std::string chat_request_json(const std::string& model, const std::vector<ChatMessage>& messages);
/// Extracts choices[0].message.content; throws ClientError.
std::string chat_response_content(std::string_view body);

}  // namespace embodied
