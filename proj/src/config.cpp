#include "embodied/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace embodied {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error("InvalidConfig", what); }

void only_keys(const json& obj, const std::string& section, std::set<std::string> allowed) {
  if (!obj.is_object()) invalid("'" + section + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.contains(it.key())) invalid("unknown key '" + section + "." + it.key() + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst, const std::string& section) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    invalid("'" + section + "." + key + "' has the wrong type");
  }
}

void read_path(const json& obj, const char* key, std::filesystem::path& dst, const std::string& section) {
  std::string s = dst.string();
  read(obj, key, s, section);
  dst = s;
}

AdapterKind adapter_from(const std::string& s, const std::string& what) {
  if (s == "stub") return AdapterKind::Stub;
  if (s == "live") return AdapterKind::Live;
  invalid(what + " must be 'stub' or 'live', got '" + s + "'");
}

DeviceTransport transport_from(const std::string& s) {
  if (s == "virtual") return DeviceTransport::Virtual;
  if (s == "serial") return DeviceTransport::Serial;
  invalid("device transport must be 'virtual' or 'serial', got '" + s + "'");
}

AudioSourceKind source_from(const std::string& s) {
  if (s == "synthetic") return AudioSourceKind::Synthetic;
  if (s == "wav") return AudioSourceKind::Wav;
  if (s == "command") return AudioSourceKind::Command;
  invalid("audio source must be 'synthetic', 'wav' or 'command', got '" + s + "'");
}

}  // namespace

std::string_view to_string(AdapterKind k) noexcept { return k == AdapterKind::Stub ? "stub" : "live"; }
std::string_view to_string(DeviceTransport t) noexcept {
  return t == DeviceTransport::Virtual ? "virtual" : "serial";
}

ServiceConfig parse_config(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false, /*ignore_comments=*/true);
  if (doc.is_discarded()) invalid("config is not valid JSON");
  only_keys(doc, "config",
            {"listen", "adapters", "stub", "live", "voice", "audio", "gestures", "device", "session", "log_dir"});
  ServiceConfig c;

  if (auto s = doc.find("listen"); s != doc.end()) {
    only_keys(*s, "listen", {"host", "port"});
    read(*s, "host", c.host, "listen");
    read(*s, "port", c.port, "listen");
  }
  if (auto s = doc.find("adapters"); s != doc.end()) {
    only_keys(*s, "adapters", {"stt", "llm", "tts"});
    std::string stt = "stub", llm = "stub", tts = "stub";
    read(*s, "stt", stt, "adapters");
    read(*s, "llm", llm, "adapters");
    read(*s, "tts", tts, "adapters");
    c.stt = adapter_from(stt, "adapters.stt");
    c.llm = adapter_from(llm, "adapters.llm");
    c.tts = adapter_from(tts, "adapters.tts");
  }
  if (auto s = doc.find("stub"); s != doc.end()) {
    only_keys(*s, "stub", {"transcripts", "replies"});
    read_path(*s, "transcripts", c.stub_transcripts, "stub");
    read_path(*s, "replies", c.stub_replies, "stub");
  }
  if (auto s = doc.find("live"); s != doc.end()) {
    only_keys(*s, "live", {"llm_model", "stt_model", "tts_executable"});
    read(*s, "llm_model", c.llm_model, "live");
    read(*s, "stt_model", c.stt_model, "live");
    read(*s, "tts_executable", c.tts_executable, "live");
  }
  if (auto s = doc.find("voice"); s != doc.end()) {
    only_keys(*s, "voice", {"voice", "words_per_minute", "pitch"});
    read(*s, "voice", c.voice.voice, "voice");
    read(*s, "words_per_minute", c.voice.words_per_minute, "voice");
    read(*s, "pitch", c.voice.pitch, "voice");
  }
  if (auto s = doc.find("audio"); s != doc.end()) {
    only_keys(*s, "audio",
              {"source", "wav", "capture_command", "playback_command", "playback_time_scale",
               "silence_hangover_s", "energy_threshold", "min_utterance_s", "max_capture_s"});
    std::string source = "synthetic";
    read(*s, "source", source, "audio");
    c.audio_source = source_from(source);
    read_path(*s, "wav", c.audio_wav, "audio");
    read(*s, "capture_command", c.capture_command, "audio");
    read(*s, "playback_command", c.playback_command, "audio");
    read(*s, "playback_time_scale", c.playback_time_scale, "audio");
    read(*s, "silence_hangover_s", c.endpointer.silence_hangover_s, "audio");
    read(*s, "energy_threshold", c.endpointer.energy_threshold, "audio");
    read(*s, "min_utterance_s", c.endpointer.min_utterance_s, "audio");
    read(*s, "max_capture_s", c.endpointer.max_capture_s, "audio");
  }
  if (auto s = doc.find("gestures"); s != doc.end()) {
    only_keys(*s, "gestures", {"table", "max_deg", "max_time_frac", "seed"});
    read_path(*s, "table", c.gesture_table, "gestures");
    read(*s, "max_deg", c.jitter.max_deg, "gestures");
    read(*s, "max_time_frac", c.jitter.max_time_frac, "gestures");
    read(*s, "seed", c.jitter.seed, "gestures");
  }
  if (auto s = doc.find("device"); s != doc.end()) {
    only_keys(*s, "device", {"transport", "serial_port", "baud"});
    std::string transport = "virtual";
    read(*s, "transport", transport, "device");
    c.device = transport_from(transport);
    read(*s, "serial_port", c.serial_port, "device");
    read(*s, "baud", c.baud, "device");
  }
  if (auto s = doc.find("session"); s != doc.end()) {
    only_keys(*s, "session", {"brevity_limit", "max_exchanges"});
    read(*s, "brevity_limit", c.brevity_limit, "session");
    read(*s, "max_exchanges", c.max_exchanges, "session");
  }
  read_path(doc, "log_dir", c.log_dir, "config");
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_env_overrides(ServiceConfig& c) {
  auto env = [](const char* name) -> const char* {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? v : nullptr;
  };
  if (auto v = env("EMBODIED_HOST")) c.host = v;
  if (auto v = env("EMBODIED_PORT")) {
    try {
      c.port = std::stoi(v);
    } catch (const std::exception&) {
      invalid(std::string("EMBODIED_PORT is not a number: ") + v);
    }
  }
  if (auto v = env("EMBODIED_LOG_DIR")) c.log_dir = v;
  if (auto v = env("EMBODIED_STT")) c.stt = adapter_from(v, "EMBODIED_STT");
  if (auto v = env("EMBODIED_LLM")) c.llm = adapter_from(v, "EMBODIED_LLM");
  if (auto v = env("EMBODIED_TTS")) c.tts = adapter_from(v, "EMBODIED_TTS");
  if (auto v = env("EMBODIED_DEVICE")) c.device = transport_from(v);
  if (auto v = env("EMBODIED_SERIAL_PORT")) c.serial_port = v;
}

void validate(const ServiceConfig& c) {
  if (c.port < 0 || c.port > 65535) invalid("port out of range");
  c.endpointer.validate();
  if (c.playback_time_scale < 0.0) invalid("playback_time_scale must be >= 0");
  if (c.jitter.max_deg < 0.0) invalid("gestures.max_deg must be >= 0");
  if (!(c.jitter.max_time_frac >= 0.0 && c.jitter.max_time_frac < 1.0)) {
    invalid("gestures.max_time_frac must be in [0, 1)");
  }
  if (c.brevity_limit < 0) invalid("session.brevity_limit must be >= 0");
  if (c.max_exchanges == 0) invalid("session.max_exchanges must be > 0");
  if (c.voice.words_per_minute <= 0) invalid("voice.words_per_minute must be > 0");
  if (c.audio_source == AudioSourceKind::Wav && c.audio_wav.empty()) invalid("audio.wav is required for source 'wav'");
  if (c.audio_source == AudioSourceKind::Command && c.capture_command.empty()) {
    invalid("audio.capture_command is required for source 'command'");
  }
  if (c.device == DeviceTransport::Serial && c.serial_port.empty()) invalid("device.serial_port is required");
  try {
    if (c.llm == AdapterKind::Live) llm_endpoint_from_env(c.llm_model);
    if (c.stt == AdapterKind::Live) stt_endpoint_from_env(c.stt_model);
  } catch (const Error& e) {
    invalid(e.what());
  }
}

void force_stubs(ServiceConfig& c) {
  c.stt = AdapterKind::Stub;
  c.llm = AdapterKind::Stub;
  c.tts = AdapterKind::Stub;
}

}  // namespace embodied
