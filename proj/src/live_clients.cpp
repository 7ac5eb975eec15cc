#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "embodied/clients.hpp"

namespace embodied {

namespace {

using nlohmann::json;

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : std::move(fallback);
}

httplib::Client make_client(const std::string& base_url) {
  httplib::Client cli(base_url);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(60);
  return cli;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

}  // namespace

LiveEndpoint llm_endpoint_from_env(std::string model) {
  LiveEndpoint ep{env_or("EMBODIED_LLM_URL", "https://api.openai.com"),
                  env_or("EMBODIED_LLM_API_KEY", ""), std::move(model)};
  if (ep.api_key.empty()) throw Error("MissingCredentials", "EMBODIED_LLM_API_KEY is not set");
  return ep;
}

LiveEndpoint stt_endpoint_from_env(std::string model) {
  LiveEndpoint ep{env_or("EMBODIED_STT_URL", env_or("EMBODIED_LLM_URL", "https://api.openai.com")),
                  env_or("EMBODIED_STT_API_KEY", env_or("EMBODIED_LLM_API_KEY", "")),
                  std::move(model)};
  if (ep.api_key.empty()) throw Error("MissingCredentials", "EMBODIED_STT_API_KEY is not set");
  return ep;
}

std::string chat_request_json(const std::string& model, const std::vector<ChatMessage>& messages) {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model", model}, {"messages", msgs}}.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string chat_response_content(std::string_view body) {
  json j = json::parse(body.begin(), body.end(), nullptr, false);
  if (j.is_discarded()) throw ClientError("completion response is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ClientError(std::string("unexpected completion response: ") + e.what());
  }
}

std::string HttpLlm::complete(const std::vector<ChatMessage>& messages) {
  auto cli = make_client(endpoint_.base_url);
  cli.set_bearer_token_auth(endpoint_.api_key);
  auto res = cli.Post("/v1/chat/completions", chat_request_json(endpoint_.model, messages),
                      "application/json");
  if (!res) throw ClientError("completion request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw ClientError("completion request returned HTTP " + std::to_string(res->status));
  }
  return chat_response_content(res->body);
}

std::string HttpStt::transcribe(const audio::AudioSegment& audio) {
  const auto wav = audio::encode_wav(audio);
  auto cli = make_client(endpoint_.base_url);
  cli.set_bearer_token_auth(endpoint_.api_key);
  httplib::MultipartFormDataItems items{
      {"file", std::string(wav.begin(), wav.end()), "speech.wav", "audio/wav"},
      {"model", endpoint_.model, "", ""},
      {"response_format", "json", "", ""},
  };
  auto res = cli.Post("/v1/audio/transcriptions", items);
  if (!res) throw ClientError("transcription request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw ClientError("transcription request returned HTTP " + std::to_string(res->status));
  }
  json j = json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("text") || !j["text"].is_string()) {
    throw ClientError("unexpected transcription response");
  }
  return j["text"].get<std::string>();
}

audio::AudioSegment EspeakTts::synthesize(const std::string& text, const VoiceProfile& voice) {
  const auto out = std::filesystem::temp_directory_path() /
                   ("embodied-tts-" + std::to_string(::getpid()) + ".wav");
  const std::string cmd = executable_ + " -v " + shell_quote(voice.voice) + " -s " +
                          std::to_string(voice.words_per_minute) + " -p " + std::to_string(voice.pitch) +
                          " -w " + shell_quote(out.string()) + " " + shell_quote(text) +
                          " >/dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) throw ClientError("speech synthesis command failed");
  try {
    auto seg = audio::read_wav(out);
    std::filesystem::remove(out);
    return seg;
  } catch (const Error& e) {
    std::filesystem::remove(out);
    throw ClientError(std::string("speech synthesis produced unreadable audio: ") + e.what());
  }
}

}  // namespace embodied
